#include "modcheck/preproc.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace modcheck::cfront {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FrontendError({path, 1, 1}, "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Replace comments by spaces, keeping newlines so locations stay correct.
std::string strip_comments(const std::string& src, const std::string& file) {
    std::string out;
    out.reserve(src.size());
    int line = 1;
    size_t i = 0;
    while (i < src.size()) {
        char c = src[i];
        if (c == '\n') ++line;
        if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
            while (i < src.size() && src[i] != '\n') { out += ' '; ++i; }
        } else if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
            int open_line = line;
            out += "  ";
            i += 2;
            bool closed = false;
            while (i + 1 < src.size() + 1 && i < src.size()) {
                if (i + 1 < src.size() && src[i] == '*' && src[i + 1] == '/') {
                    out += "  ";
                    i += 2;
                    closed = true;
                    break;
                }
                if (src[i] == '\n') { out += '\n'; ++line; }
                else out += ' ';
                ++i;
            }
            if (!closed)
                throw FrontendError({file, open_line, 1}, "unterminated block comment");
        } else if (c == '"' || c == '\'') {
            char q = c;
            out += c;
            ++i;
            while (i < src.size() && src[i] != q) {
                if (src[i] == '\\' && i + 1 < src.size()) { out += src[i]; ++i; }
                out += src[i];
                ++i;
            }
            if (i < src.size()) { out += src[i]; ++i; }
        } else {
            out += c;
            ++i;
        }
    }
    return out;
}

struct Macro {
    bool function_like = false;
    std::vector<std::string> params;
    std::vector<CTok> body;
};

struct CondFrame {
    bool parent_active;
    bool this_active;
    bool taken_any;
    bool in_else = false;
    SourceLoc open_loc;
};

class Preprocessor {
public:
    explicit Preprocessor(const PreprocConfig& cfg) : cfg_(cfg) {
        for (const auto& [name, val] : cfg.defines) {
            Macro m;
            if (!val.empty()) m.body = lex_fragment(val, "<cmdline>", 1);
            macros_[name] = std::move(m);
        }
    }

    PreprocResult run(const std::string& entry) {
        process_file(entry, 0);
        return {std::move(out_), std::move(includes_)};
    }

private:
    void process_file(const std::string& path, int depth) {
        if (depth > cfg_.max_include_depth)
            throw FrontendError({path, 1, 1}, "include depth exceeds " +
                                                  std::to_string(cfg_.max_include_depth));
        std::string text = strip_comments(read_file(path), path);
        std::vector<std::string> lines;
        {
            std::string cur;
            for (char c : text) {
                if (c == '\n') { lines.push_back(cur); cur.clear(); }
                else cur += c;
            }
            lines.push_back(cur);
        }

        size_t cond_base = conds_.size();
        std::vector<CTok> pending;  // raw tokens awaiting expansion

        size_t li = 0;
        while (li < lines.size()) {
            int lineno = static_cast<int>(li) + 1;
            std::string line = lines[li];
            // splice backslash continuations
            int extra = 0;
            while (!line.empty() && line.back() == '\\' && li + 1 < lines.size()) {
                line.pop_back();
                ++li;
                ++extra;
                line += lines[li];
            }
            ++li;

            size_t first = line.find_first_not_of(" \t");
            if (first != std::string::npos && line[first] == '#') {
                flush(pending, path);
                handle_directive(line.substr(first + 1), path, lineno, depth);
            } else if (active()) {
                auto toks = lex_fragment(line, path, lineno);
                pending.insert(pending.end(), toks.begin(), toks.end());
            }
            (void)extra;
        }
        flush(pending, path);
        if (conds_.size() != cond_base)
            throw FrontendError(conds_.back().open_loc, "unterminated conditional directive");
    }

    bool active() const {
        for (const auto& f : conds_)
            if (!(f.parent_active && f.this_active)) return false;
        return true;
    }

    void flush(std::vector<CTok>& pending, const std::string&) {
        if (pending.empty()) return;
        std::set<std::string> hide;
        auto expanded = expand(pending, hide, 0);
        out_.insert(out_.end(), expanded.begin(), expanded.end());
        pending.clear();
    }

    void handle_directive(const std::string& rest, const std::string& file, int lineno,
                          int depth) {
        auto toks = lex_fragment(rest, file, lineno);
        if (toks.empty()) return;  // null directive
        const std::string& d = toks[0].text;
        SourceLoc dloc = toks[0].loc;

        if (d == "include") {
            handle_include(toks, file, lineno, depth, rest);
        } else if (d == "ifdef" || d == "ifndef") {
            bool defined_ = toks.size() > 1 && macros_.count(toks[1].text);
            push_cond(d == "ifdef" ? defined_ : !defined_, dloc);
        } else if (d == "if") {
            bool v = active() ? eval_condition({toks.begin() + 1, toks.end()}, dloc) : false;
            push_cond(v, dloc);
        } else if (d == "elif") {
            if (conds_.empty()) throw FrontendError(dloc, "#elif without #if");
            auto& f = conds_.back();
            if (f.in_else) throw FrontendError(dloc, "#elif after #else");
            if (f.taken_any) {
                f.this_active = false;
            } else {
                f.this_active =
                    f.parent_active && eval_condition({toks.begin() + 1, toks.end()}, dloc);
                f.taken_any = f.this_active;
            }
        } else if (d == "else") {
            if (conds_.empty()) throw FrontendError(dloc, "#else without #if");
            auto& f = conds_.back();
            if (f.in_else) throw FrontendError(dloc, "duplicate #else");
            f.in_else = true;
            f.this_active = f.parent_active && !f.taken_any;
            f.taken_any = true;
        } else if (d == "endif") {
            if (conds_.empty()) throw FrontendError(dloc, "#endif without #if");
            conds_.pop_back();
        } else if (!active()) {
            // other directives in inactive branches are ignored
        } else if (d == "define") {
            handle_define(toks, dloc);
        } else if (d == "undef") {
            if (toks.size() > 1) macros_.erase(toks[1].text);
        } else if (d == "error") {
            throw FrontendError(dloc, "#error " + rest);
        } else if (d == "pragma" || d == "line") {
            // ignored
        } else {
            throw FrontendError(dloc, "unknown preprocessor directive '#" + d + "'");
        }
    }

    void push_cond(bool v, SourceLoc loc) {
        CondFrame f;
        f.parent_active = active();
        f.this_active = f.parent_active && v;
        f.taken_any = v;
        f.open_loc = std::move(loc);
        conds_.push_back(std::move(f));
    }

    void handle_include(const std::vector<CTok>& toks, const std::string& file, int lineno,
                        int depth, const std::string& rest) {
        if (toks.size() < 2)
            throw FrontendError({file, lineno, 1}, "malformed #include");
        IncludeRecord rec;
        rec.loc = toks[1].loc;
        rec.active = active();
        std::string target;
        if (toks[1].kind == CTok::String) {
            rec.directive_text = toks[1].text;
            target = toks[1].text.substr(1, toks[1].text.size() - 2);
            rec.angled = false;
        } else if (toks[1].is_punct("<")) {
            for (size_t i = 2; i < toks.size() && !toks[i].is_punct(">"); ++i)
                target += toks[i].text;
            rec.directive_text = "<" + target + ">";
            rec.angled = true;
        } else {
            throw FrontendError(toks[1].loc, "malformed #include: " + rest);
        }
        rec.is_header_suffix = target.size() > 2 && target.ends_with(".h");

        if (rec.active) {
            std::string resolved = resolve_include(target, rec.angled, file);
            rec.resolved_path = resolved;
            includes_.push_back(rec);
            if (!resolved.empty()) {
                process_file(resolved, depth + 1);
            } else if (!cfg_.allow_unresolved_includes) {
                throw FrontendError(rec.loc, "cannot resolve include " + rec.directive_text);
            }
        } else {
            includes_.push_back(rec);
        }
    }

    std::string resolve_include(const std::string& target, bool angled,
                                const std::string& including_file) const {
        std::vector<fs::path> candidates;
        if (!angled) candidates.push_back(fs::path(including_file).parent_path() / target);
        for (const auto& d : cfg_.include_dirs) candidates.push_back(fs::path(d) / target);
        for (const auto& c : candidates) {
            std::error_code ec;
            if (fs::exists(c, ec) && fs::is_regular_file(c, ec)) return c.string();
        }
        return {};
    }

    void handle_define(const std::vector<CTok>& toks, const SourceLoc& dloc) {
        if (toks.size() < 2 || toks[1].kind != CTok::Ident)
            throw FrontendError(dloc, "malformed #define");
        const CTok& name = toks[1];
        Macro m;
        size_t i = 2;
        // function-like iff '(' is immediately adjacent to the name
        bool adjacent = i < toks.size() && toks[i].is_punct("(") &&
                        toks[i].loc.line == name.loc.line &&
                        toks[i].loc.column == name.loc.column + static_cast<int>(name.text.size());
        if (adjacent) {
            m.function_like = true;
            ++i;
            while (i < toks.size() && !toks[i].is_punct(")")) {
                if (toks[i].kind == CTok::Ident) m.params.push_back(toks[i].text);
                else if (toks[i].is_punct("...") )
                    throw FrontendError(toks[i].loc, "variadic macros are not supported", true);
                else if (!toks[i].is_punct(","))
                    throw FrontendError(toks[i].loc, "malformed macro parameter list");
                ++i;
            }
            if (i >= toks.size()) throw FrontendError(dloc, "unterminated macro parameter list");
            ++i;
        }
        for (; i < toks.size(); ++i) {
            if (toks[i].is_punct("##"))
                throw FrontendError(toks[i].loc, "token pasting (##) is not supported", true);
            if (m.function_like && toks[i].is_punct("#"))
                throw FrontendError(toks[i].loc, "stringizing (#) is not supported", true);
            m.body.push_back(toks[i]);
        }
        macros_[name.text] = std::move(m);
    }

    std::vector<CTok> expand(const std::vector<CTok>& in, std::set<std::string>& hide,
                             int depth) {
        if (depth > cfg_.max_macro_depth)
            throw FrontendError(in.empty() ? SourceLoc{} : in[0].loc,
                                "macro expansion depth exceeds " +
                                    std::to_string(cfg_.max_macro_depth));
        std::vector<CTok> out;
        for (size_t i = 0; i < in.size(); ++i) {
            const CTok& t = in[i];
            if (t.kind != CTok::Ident || hide.count(t.text) || cfg_.null_macros.count(t.text)) {
                out.push_back(t);
                continue;
            }
            auto it = macros_.find(t.text);
            if (it == macros_.end()) {
                out.push_back(t);
                continue;
            }
            const Macro& m = it->second;
            if (!m.function_like) {
                hide.insert(t.text);
                auto body = relocate(m.body, t.loc);
                auto exp = expand(body, hide, depth + 1);
                hide.erase(t.text);
                out.insert(out.end(), exp.begin(), exp.end());
                continue;
            }
            // function-like: require an argument list, else leave untouched
            if (i + 1 >= in.size() || !in[i + 1].is_punct("(")) {
                out.push_back(t);
                continue;
            }
            size_t j = i + 2;
            int paren = 1;
            std::vector<std::vector<CTok>> args(1);
            for (; j < in.size(); ++j) {
                if (in[j].is_punct("(")) ++paren;
                if (in[j].is_punct(")")) {
                    if (--paren == 0) break;
                }
                if (paren == 1 && in[j].is_punct(",")) {
                    args.emplace_back();
                    continue;
                }
                args.back().push_back(in[j]);
            }
            if (j >= in.size())
                throw FrontendError(t.loc, "unterminated invocation of macro '" + t.text + "'");
            if (args.size() == 1 && args[0].empty() && m.params.empty()) args.clear();
            if (args.size() != m.params.size())
                throw FrontendError(t.loc, "macro '" + t.text + "' expects " +
                                               std::to_string(m.params.size()) +
                                               " argument(s), got " +
                                               std::to_string(args.size()));
            // arguments are fully expanded before substitution
            for (auto& a : args) a = expand(a, hide, depth + 1);
            std::vector<CTok> subst;
            for (const auto& bt : m.body) {
                bool replaced = false;
                if (bt.kind == CTok::Ident) {
                    for (size_t p = 0; p < m.params.size(); ++p) {
                        if (bt.text == m.params[p]) {
                            auto arg = relocate(args[p], t.loc);
                            subst.insert(subst.end(), arg.begin(), arg.end());
                            replaced = true;
                            break;
                        }
                    }
                }
                if (!replaced) subst.push_back(bt);
            }
            subst = relocate(subst, t.loc);
            hide.insert(t.text);
            auto exp = expand(subst, hide, depth + 1);
            hide.erase(t.text);
            out.insert(out.end(), exp.begin(), exp.end());
            i = j;
        }
        return out;
    }

    // Expanded tokens report the location of the macro use.
    static std::vector<CTok> relocate(std::vector<CTok> toks, const SourceLoc& loc) {
        for (auto& t : toks) t.loc = loc;
        return toks;
    }

    // Constant-expression evaluation for #if / #elif.
    long eval_condition(std::vector<CTok> toks, const SourceLoc& dloc) {
        // resolve `defined X` / `defined(X)` before macro expansion
        std::vector<CTok> resolved;
        for (size_t i = 0; i < toks.size(); ++i) {
            if (toks[i].kind == CTok::Ident && toks[i].text == "defined") {
                std::string name;
                if (i + 1 < toks.size() && toks[i + 1].kind == CTok::Ident) {
                    name = toks[i + 1].text;
                    i += 1;
                } else if (i + 3 < toks.size() && toks[i + 1].is_punct("(") &&
                           toks[i + 2].kind == CTok::Ident && toks[i + 3].is_punct(")")) {
                    name = toks[i + 2].text;
                    i += 3;
                } else {
                    throw FrontendError(toks[i].loc, "malformed 'defined' operator");
                }
                CTok num;
                num.kind = CTok::Number;
                num.text = macros_.count(name) ? "1" : "0";
                num.loc = toks[i].loc;
                resolved.push_back(num);
            } else {
                resolved.push_back(toks[i]);
            }
        }
        std::set<std::string> hide;
        auto expanded = expand(resolved, hide, 0);
        CondEval ev{expanded, 0, dloc};
        long v = ev.parse_expr(0);
        if (ev.pos != expanded.size())
            throw FrontendError(dloc, "trailing tokens in #if expression");
        return v;
    }

    struct CondEval {
        const std::vector<CTok>& t;
        size_t pos;
        SourceLoc dloc;

        bool at(std::string_view p) const { return pos < t.size() && t[pos].is_punct(p); }

        long parse_expr(int min_prec) {
            long lhs = parse_unary();
            while (pos < t.size()) {
                static const std::vector<std::pair<std::string, int>> ops = {
                    {"||", 1}, {"&&", 2}, {"|", 3}, {"^", 4}, {"&", 5},
                    {"==", 6}, {"!=", 6}, {"<", 7}, {"<=", 7}, {">", 7}, {">=", 7},
                    {"<<", 8}, {">>", 8}, {"+", 9}, {"-", 9},
                    {"*", 10}, {"/", 10}, {"%", 10}};
                int prec = -1;
                std::string op;
                for (const auto& [o, p] : ops)
                    if (at(o) && p > prec) { prec = p; op = o; }
                if (prec < min_prec || prec < 0) break;
                ++pos;
                long rhs = parse_expr(prec + 1);
                if (op == "||") lhs = (lhs || rhs);
                else if (op == "&&") lhs = (lhs && rhs);
                else if (op == "|") lhs = lhs | rhs;
                else if (op == "^") lhs = lhs ^ rhs;
                else if (op == "&") lhs = lhs & rhs;
                else if (op == "==") lhs = (lhs == rhs);
                else if (op == "!=") lhs = (lhs != rhs);
                else if (op == "<") lhs = (lhs < rhs);
                else if (op == "<=") lhs = (lhs <= rhs);
                else if (op == ">") lhs = (lhs > rhs);
                else if (op == ">=") lhs = (lhs >= rhs);
                else if (op == "<<") lhs = lhs << rhs;
                else if (op == ">>") lhs = lhs >> rhs;
                else if (op == "+") lhs = lhs + rhs;
                else if (op == "-") lhs = lhs - rhs;
                else if (op == "*") lhs = lhs * rhs;
                else if (op == "/") lhs = rhs ? lhs / rhs : 0;
                else if (op == "%") lhs = rhs ? lhs % rhs : 0;
            }
            return lhs;
        }

        long parse_unary() {
            if (at("!")) { ++pos; return !parse_unary(); }
            if (at("-")) { ++pos; return -parse_unary(); }
            if (at("+")) { ++pos; return parse_unary(); }
            if (at("~")) { ++pos; return ~parse_unary(); }
            if (at("(")) {
                ++pos;
                long v = parse_expr(0);
                if (!at(")")) throw FrontendError(dloc, "missing ')' in #if expression");
                ++pos;
                return v;
            }
            if (pos >= t.size()) throw FrontendError(dloc, "truncated #if expression");
            const CTok& tok = t[pos++];
            if (tok.kind == CTok::Number) {
                std::string digits = tok.text;
                while (!digits.empty() && (digits.back() == 'u' || digits.back() == 'U' ||
                                           digits.back() == 'l' || digits.back() == 'L'))
                    digits.pop_back();
                try {
                    return std::stol(digits, nullptr, 0);
                } catch (const std::exception&) {
                    throw FrontendError(tok.loc, "bad integer in #if expression: " + tok.text);
                }
            }
            if (tok.kind == CTok::Ident) return 0;  // undefined identifiers are 0
            throw FrontendError(tok.loc, "unexpected token in #if expression: " + tok.text);
        }
    };

    const PreprocConfig& cfg_;
    std::map<std::string, Macro> macros_;
    std::vector<CondFrame> conds_;
    std::vector<CTok> out_;
    std::vector<IncludeRecord> includes_;
};

} // namespace

PreprocResult preprocess(const std::string& entry_file, const PreprocConfig& cfg) {
    return Preprocessor(cfg).run(entry_file);
}

} // namespace modcheck::cfront
