#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "modcheck/cmodule.hpp"
#include "modcheck/lexer.hpp"

// Minimal C preprocessor: #include resolution, object-like and function-like
// macro expansion, and conditional compilation. Token pasting (##) and
// stringizing (#) are outside the supported subset.

namespace modcheck::cfront {

struct PreprocConfig {
    std::vector<std::string> include_dirs;
    std::map<std::string, std::string> defines;  // predefined object-like macros
    // Unresolved includes are a hard error unless set; skipped includes keep
    // their IncludeRecord with an empty resolved_path.
    bool allow_unresolved_includes = false;
    // Macros never expanded; the parser treats these identifiers as null
    // pointer constants (pointer-literal rule exemption).
    std::set<std::string> null_macros;
    int max_include_depth = 32;
    int max_macro_depth = 64;
};

struct PreprocResult {
    std::vector<CTok> tokens;
    std::vector<IncludeRecord> includes;  // every #include directive seen, active or not
};

PreprocResult preprocess(const std::string& entry_file, const PreprocConfig& cfg);

} // namespace modcheck::cfront
