#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "modcheck/cmodule.hpp"
#include "modcheck/contract.hpp"
#include "modcheck/diag.hpp"

namespace modcheck::callorder {

// One call occurrence inside a function after splicing in locally defined
// callees; must_before holds every callee name guaranteed to have been
// invoked earlier within the same activation.
struct CallSiteInfo {
    std::string callee;
    SourceLoc loc;
    std::set<std::string> must_before;
};

struct CallSequenceSummary {
    std::vector<CallSiteInfo> sites;
    std::set<std::string> must_call;  // invoked on every path
    std::set<std::string> may_call;
};

std::map<std::string, CallSequenceSummary> summarize_call_sequences(const cfront::CModule& m);

// Static check of the declared external call order. The run model: entry
// points are activated repeatedly, every entry runs at least once, and first
// activations respect the declared entry order. A constraint `a < b` demands
// that the first call of b in any run is preceded by a call of a.
std::vector<Diagnostic> check_call_order(const cfront::CModule& m,
                                         const isc::ISContract& contract);

// ---------------------------------------------------------------------------
// Exhaustive reference oracle used by the test suite.

struct OracleBounds {
    int max_schedule_len = 3;
    int max_unroll = 2;       // per-path traversals of each loop back edge
    long max_paths = 20000;   // per-function expanded trace cap
    long max_runs = 500000;   // schedule x trace combinations examined
};

// All event sequences of one activation of `fn`: every CFG path with loop
// back edges taken at most max_unroll times, locally defined callees expanded
// inline. Sets *exceeded when a cap truncated the enumeration.
std::vector<std::vector<cfront::Event>> enumerate_event_traces(const cfront::CModule& m,
                                                               const std::string& fn,
                                                               int max_unroll, long max_paths,
                                                               bool* exceeded);

struct OracleResult {
    bool violation_found = false;
    bool bound_exceeded = false;
    std::string violated_before;
    std::string violated_after;
    std::vector<std::string> schedule;  // entry activations of the violating run
    std::vector<std::string> trace;     // its flattened call trace
    long runs_checked = 0;
};

// Enumerates admissible schedules and per-activation traces within bounds and
// reports the first run whose call trace breaks a declared constraint.
OracleResult enumerate_oracle(const cfront::CModule& m, const isc::ISContract& contract,
                              const OracleBounds& bounds);

// Admissible entry schedules: every entry present, first activations
// consistent with the declared entry order, length within
// [entry count, max_schedule_len]. Shared with the test-side oracles.
std::vector<std::vector<std::string>> admissible_schedules(const isc::ISContract& contract,
                                                           int max_schedule_len);

} // namespace modcheck::callorder
