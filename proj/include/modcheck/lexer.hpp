#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "modcheck/source_loc.hpp"

namespace modcheck::cfront {

struct CTok {
    enum Kind { Ident, Number, String, CharLit, Punct, Eof } kind = Eof;
    std::string text;
    SourceLoc loc;

    bool is(std::string_view t) const { return text == t; }
    bool is_punct(std::string_view t) const { return kind == Punct && text == t; }
};

// Tokenize one physical line or whole file fragment. Comments must already be
// stripped (the preprocessor handles them to keep line numbers intact).
std::vector<CTok> lex_fragment(std::string_view src, const std::string& file, int start_line);

} // namespace modcheck::cfront
