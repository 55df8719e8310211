#pragma once

#include <string>

#include "modcheck/cmodule.hpp"
#include "modcheck/preproc.hpp"

namespace modcheck::cfront {

// Preprocess and parse the `.h`/`.c` pair into a CModule. Throws
// FrontendError on parse errors, unsupported constructs, unresolved includes
// (per config) and direct or mutual recursion among module functions.
CModule parse_module(const std::string& h_path, const std::string& c_path,
                     const PreprocConfig& cfg);

// Structural invariant: valid edge targets, exit has no successors, every
// block reachable from entry. Throws std::logic_error on violation.
void check_cfg_wellformed(const Cfg& cfg);

} // namespace modcheck::cfront
