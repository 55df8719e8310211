#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "modcheck/cmodule.hpp"
#include "modcheck/contract.hpp"
#include "modcheck/diag.hpp"

namespace modcheck::dataflow {

// Per-function summary of effects on module file-scope variables. Calls to
// other functions defined in the module are spliced in; partial writes
// (array element / struct field) never count as definite initialization.
struct EffectSummary {
    std::set<std::string> must_write;  // written in whole on every path
    std::set<std::string> may_write;   // written (whole or part) on some path
    std::set<std::string> may_read;
    std::set<std::string> may_rbw;  // read before any whole write on some path
    std::map<std::string, SourceLoc> rbw_locs;  // earliest such read
};

// Summaries for every function defined in the module, call-DAG bottom-up.
std::map<std::string, EffectSummary> compute_effects(const cfront::CModule& m);

// Initialization-before-use over the whole module lifecycle: every admissible
// run repeats the entry points with first activations respecting the declared
// entry order. A read is safe when the variable has a declaration
// initializer or some entry ordered before the reader definitely writes it.
// Address-taken variables defeat the analysis and are reported as violations.
std::vector<Diagnostic> check_init_before_read(const cfront::CModule& m,
                                               const isc::ISContract& contract);

} // namespace modcheck::dataflow
