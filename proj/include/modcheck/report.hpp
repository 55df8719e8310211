#pragma once

#include <map>
#include <string>
#include <vector>

#include "modcheck/diag.hpp"

namespace modcheck::report {

struct CriticOutcome {
    std::string name;
    CheckStatus status = CheckStatus::Pass;
    bool required = true;
    std::map<std::string, long> detail;  // extracted counters, e.g. proven/total
    std::string raw_excerpt;             // bounded captured output
    double duration_s = 0.0;
    std::string skip_reason;
};

struct Report {
    int schema_version = 1;
    std::string module_name;
    std::string contract_path;
    std::string timestamp;
    std::string tool_version;
    std::vector<RuleResult> tasks;
    std::vector<CriticOutcome> critics;
    std::string verdict;  // verified | not-verified | error
};

// Verdict: any task error or required-critic error -> error; otherwise
// verified iff every non-skipped task and critic passes (and, in strict
// mode, no warnings were emitted). Errors of non-required critics are
// recorded but do not move the verdict.
std::string compute_verdict(const std::vector<RuleResult>& tasks,
                            const std::vector<CriticOutcome>& critics, bool strict_advisory);

Report aggregate(std::string module_name, std::string contract_path,
                 std::vector<RuleResult> tasks, std::vector<CriticOutcome> critics,
                 bool strict_advisory, std::string tool_version, std::string timestamp);

std::string render_text(const Report& r);

// canonical=true drops timestamp and durations so identical runs are
// byte-identical.
std::string render_json(const Report& r, bool canonical = false);

// Lossless inverse of render_json(r, false).
Report report_from_json(const std::string& text);

} // namespace modcheck::report
