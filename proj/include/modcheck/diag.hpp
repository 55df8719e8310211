#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "modcheck/source_loc.hpp"

namespace modcheck {

enum class Severity { Violation, Warning };

// One rule/task finding. task_id may be empty for diagnostics raised outside
// the numbered task set (e.g. contract well-formedness problems).
struct Diagnostic {
    std::string rule_id;   // CFR1..CFR11, DFR1..DFR6, or "" for generic
    std::string task_id;   // T1..T12 or ""
    Severity severity = Severity::Violation;
    std::string message;
    SourceLoc loc;
    std::string subject;   // identifier the finding is about

    bool operator==(const Diagnostic&) const = default;
};

enum class CheckStatus { Pass, Fail, Skipped, Error };

struct RuleResult {
    std::string task_id;
    CheckStatus status = CheckStatus::Pass;
    std::vector<Diagnostic> diagnostics;
    double duration_s = 0.0;
    std::string skip_reason;  // set when status == Skipped or Error
};

inline const char* to_string(CheckStatus s) {
    switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Skipped: return "skipped";
    case CheckStatus::Error: return "error";
    }
    return "?";
}

inline const char* to_string(Severity s) {
    return s == Severity::Violation ? "violation" : "warning";
}

// Deterministic ordering for reports: (file, line, column, rule_id).
inline bool diag_less(const Diagnostic& a, const Diagnostic& b) {
    if (a.loc.file != b.loc.file) return a.loc.file < b.loc.file;
    if (a.loc.line != b.loc.line) return a.loc.line < b.loc.line;
    if (a.loc.column != b.loc.column) return a.loc.column < b.loc.column;
    if (a.rule_id != b.rule_id) return a.rule_id < b.rule_id;
    return a.message < b.message;
}

inline void sort_diags(std::vector<Diagnostic>& ds) {
    std::sort(ds.begin(), ds.end(), diag_less);
}

inline bool has_violation(const std::vector<Diagnostic>& ds) {
    for (const auto& d : ds)
        if (d.severity == Severity::Violation) return true;
    return false;
}

} // namespace modcheck
