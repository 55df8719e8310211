#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "modcheck/report.hpp"

namespace modcheck::orch {

struct RunConfig {
    std::string contract_path;  // optional; contract-dependent tasks skip without it
    std::string header_path;
    std::string source_path;
    std::vector<std::string> include_dirs;
    std::map<std::string, std::string> defines;
    std::set<std::string> null_macros = {"NULL"};
    std::vector<std::string> tasks;  // empty = all T1..T12
    std::string format = "text";     // text | json
    bool strict_advisory = false;
    bool canonical = false;          // drop timestamp/durations from the report
    std::string critics_config_path;
    std::set<std::string> typedef_allowlist;
};

struct CriticSpec {
    std::string name;
    // command template; {source} {header} {contract} placeholders are
    // substituted before the shell runs it
    std::string command;
    std::set<int> pass_exit_codes = {0};
    std::string pass_pattern;                            // optional regex over output
    std::map<std::string, std::string> counter_patterns; // name -> regex with one capture
    double timeout_s = 60.0;
    bool required = true;
};

// Parses the critics config (a JSON list of CriticSpec objects; see
// docs/critics-config.md). Throws std::runtime_error on malformed input.
std::vector<CriticSpec> load_critics_config(const std::string& path);

struct SubprocessResult {
    int exit_code = -1;
    bool timed_out = false;
    std::string output;  // stdout+stderr interleaved
};

SubprocessResult run_subprocess(const std::string& command, double timeout_s);

// Runs critics in order. The first critic gates: if it does not pass, the
// rest are skipped. Timeouts and unrunnable commands yield status=error.
std::vector<report::CriticOutcome> run_critics(const std::vector<CriticSpec>& specs,
                                               const std::string& source,
                                               const std::string& header,
                                               const std::string& contract);

// Full pipeline: parse, run tasks and critics, aggregate.
// Exit status: 0 verified, 1 not-verified, 2 error.
struct RunOutcome {
    report::Report rep;
    int exit_status = 2;
    std::string rendered;
};

RunOutcome run_check(const RunConfig& cfg);

extern const char* kToolVersion;

} // namespace modcheck::orch
