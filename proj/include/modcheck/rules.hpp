#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "modcheck/cmodule.hpp"
#include "modcheck/contract.hpp"
#include "modcheck/diag.hpp"

namespace modcheck::rules {

struct CheckConfig {
    // Raw base types tolerated by the typedef-usage rule (e.g. {"int"}).
    std::set<std::string> typedef_allowlist;
};

// Individual rule checks. Each returns its raw findings; run_task wraps them
// into a RuleResult and stamps the task id.
std::vector<Diagnostic> check_call_permissions(const cfront::CModule& m,
                                               const isc::ISContract& c);        // CFR1
std::vector<Diagnostic> check_no_function_pointers(const cfront::CModule& m);    // CFR3
std::vector<Diagnostic> check_header_purity(const cfront::CModule& m);           // CFR4
std::vector<Diagnostic> check_includes(const cfront::CModule& m);                // CFR5
std::vector<Diagnostic> check_entry_declarations(const cfront::CModule& m,
                                                 const isc::ISContract& c);      // CFR6+CFR11
std::vector<Diagnostic> check_entry_definitions(const cfront::CModule& m,
                                                const isc::ISContract& c);       // CFR7
std::vector<Diagnostic> check_local_functions(const cfront::CModule& m,
                                              const isc::ISContract& c);         // CFR8+CFR9
std::vector<Diagnostic> check_globals_static(const cfront::CModule& m);          // DFR1
std::vector<Diagnostic> check_no_pointer_literals(const cfront::CModule& m);     // DFR5
std::vector<Diagnostic> check_typedef_usage(const cfront::CModule& m,
                                            const isc::ISContract* c,
                                            const CheckConfig& cfg);             // DFR6
std::vector<Diagnostic> check_no_extern(const cfront::CModule& m,
                                        const isc::ISContract& c);               // CFR10
std::vector<Diagnostic> check_pointer_discipline(const cfront::CModule& m);      // DFR2+DFR3

// Task ids in run order.
const std::vector<std::string>& all_tasks();

// Which rules each task enforces; every rule appears under exactly one task.
const std::map<std::string, std::vector<std::string>>& task_rule_map();

bool task_needs_contract(const std::string& task);

// Dispatch one task. A task that needs the contract is Skipped when
// `contract` is null. Status is fail iff a violation-severity diagnostic was
// produced; warnings alone keep the task passing.
RuleResult run_task(const std::string& task, const cfront::CModule& m,
                    const isc::ISContract* contract, const CheckConfig& cfg);

} // namespace modcheck::rules
