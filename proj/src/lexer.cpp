#include "modcheck/lexer.hpp"

#include <cctype>

#include "modcheck/cmodule.hpp"

namespace modcheck::cfront {

namespace {

// Longest-match punctuators of the supported subset.
const char* kPuncts3[] = {"<<=", ">>=", "..."};
const char* kPuncts2[] = {"->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=",
                          "&&", "||", "+=", "-=", "*=", "/=", "%=", "&=", "^=",
                          "|=", "##"};

} // namespace

std::vector<CTok> lex_fragment(std::string_view src, const std::string& file, int start_line) {
    std::vector<CTok> out;
    int line = start_line;
    int col = 1;
    size_t i = 0;
    auto loc_here = [&] { return SourceLoc{file, line, col}; };
    auto adv = [&](size_t n) {
        for (size_t k = 0; k < n; ++k) {
            if (src[i] == '\n') { ++line; col = 1; } else { ++col; }
            ++i;
        }
    };

    while (i < src.size()) {
        char c = src[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v') {
            adv(1);
            continue;
        }
        CTok t;
        t.loc = loc_here();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = i;
            while (i < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_'))
                adv(1);
            t.kind = CTok::Ident;
            t.text = std::string(src.substr(start, i - start));
        } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                   (c == '.' && i + 1 < src.size() &&
                    std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            size_t start = i;
            // pp-number: digits, dots, identifier chars, exponent signs
            while (i < src.size()) {
                char d = src[i];
                if (std::isalnum(static_cast<unsigned char>(d)) || d == '.' || d == '_') {
                    adv(1);
                } else if ((d == '+' || d == '-') && i > start &&
                           (src[i - 1] == 'e' || src[i - 1] == 'E' || src[i - 1] == 'p' ||
                            src[i - 1] == 'P')) {
                    adv(1);
                } else {
                    break;
                }
            }
            t.kind = CTok::Number;
            t.text = std::string(src.substr(start, i - start));
        } else if (c == '"' || c == '\'') {
            char quote = c;
            size_t start = i;
            adv(1);
            while (i < src.size() && src[i] != quote) {
                if (src[i] == '\\' && i + 1 < src.size()) adv(1);
                adv(1);
            }
            if (i >= src.size())
                throw FrontendError(t.loc, quote == '"' ? "unterminated string literal"
                                                        : "unterminated character literal");
            adv(1);
            t.kind = quote == '"' ? CTok::String : CTok::CharLit;
            t.text = std::string(src.substr(start, i - start));
        } else {
            t.kind = CTok::Punct;
            std::string_view rest = src.substr(i);
            t.text = std::string(1, c);
            for (const char* p : kPuncts3)
                if (rest.substr(0, 3) == p) { t.text = p; break; }
            if (t.text.size() == 1)
                for (const char* p : kPuncts2)
                    if (rest.substr(0, 2) == p) { t.text = p; break; }
            adv(t.text.size());
        }
        out.push_back(std::move(t));
    }
    return out;
}

} // namespace modcheck::cfront
