#include "modcheck/contract.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

namespace modcheck::isc {

namespace {

struct Tok {
    enum Kind { Ident, Punct, End } kind = End;
    std::string text;
    SourceLoc loc;
};

class Lexer {
public:
    Lexer(std::string_view src, std::string file) : src_(src), file_(std::move(file)) {}

    Tok next() {
        skip_ws();
        Tok t;
        t.loc = {file_, line_, col_};
        if (pos_ >= src_.size()) return t;
        char c = src_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            t.kind = Tok::Ident;
            size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                advance();
            t.text = std::string(src_.substr(start, pos_ - start));
            return t;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            t.kind = Tok::Ident;  // numbers only appear inside type texts
            size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
                advance();
            t.text = std::string(src_.substr(start, pos_ - start));
            return t;
        }
        if (c == '.' && src_.substr(pos_, 3) == "...") {
            t.kind = Tok::Punct;
            t.text = "...";
            advance(); advance(); advance();
            return t;
        }
        t.kind = Tok::Punct;
        t.text = std::string(1, c);
        advance();
        return t;
    }

private:
    void skip_ws() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '*') {
                SourceLoc open{file_, line_, col_};
                advance(); advance();
                while (pos_ + 1 < src_.size() && !(src_[pos_] == '*' && src_[pos_ + 1] == '/'))
                    advance();
                if (pos_ + 1 >= src_.size())
                    throw ContractError(open, "unterminated block comment");
                advance(); advance();
            } else {
                break;
            }
        }
    }

    void advance() {
        if (src_[pos_] == '\n') { ++line_; col_ = 1; } else { ++col_; }
        ++pos_;
    }

    std::string_view src_;
    std::string file_;
    size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

const std::set<std::string> kTypeKeywords = {
    "void", "char", "short", "int", "long", "float", "double", "signed",
    "unsigned", "_Bool", "const", "volatile", "struct", "union", "enum"};

class Parser {
public:
    Parser(std::string_view text, const std::string& file) : lex_(text, file) {
        cur_ = lex_.next();
    }

    ISContract parse() {
        ISContract c;
        expect_ident("module");
        c.module_name = expect_name();
        expect_punct("{");
        while (!at_punct("}")) {
            if (cur_.kind == Tok::End)
                throw err("unexpected end of contract, missing '}'");
            parse_section(c);
        }
        expect_punct("}");
        if (cur_.kind != Tok::End)
            throw err("trailing input after contract");
        return c;
    }

private:
    void parse_section(ISContract& c) {
        if (cur_.kind != Tok::Ident)
            throw err("expected a section keyword, got '" + cur_.text + "'");
        std::string kw = cur_.text;
        SourceLoc kw_loc = cur_.loc;
        consume();
        expect_punct(":");
        if (kw == "entry_points" || kw == "entry_functions" || kw == "EntryPoint") {
            require_unseen("entry_points", kw_loc);
            c.entry_keyword = kw;
            c.entry_points = parse_fun_decl_list();
        } else if (kw == "entry_order" || kw == "EntryOrder") {
            require_unseen("entry_order", kw_loc);
            c.entry_order_keyword = kw;
            c.entry_order = parse_order_list();
        } else if (kw == "external_calls" || kw == "ExtCalls") {
            require_unseen("external_calls", kw_loc);
            c.external_calls_keyword = kw;
            c.external_groups = parse_group_list();
        } else if (kw == "external_call_order" || kw == "external_order" || kw == "ExtOrder") {
            require_unseen("external_call_order", kw_loc);
            c.external_order_keyword = kw;
            c.external_order = parse_order_list();
        } else {
            throw ContractError(kw_loc, "unknown section keyword '" + kw + "'");
        }
    }

    void require_unseen(const std::string& canonical, const SourceLoc& loc) {
        if (!seen_.insert(canonical).second)
            throw ContractError(loc, "duplicate section '" + canonical + "'");
    }

    std::vector<FunSignature> parse_fun_decl_list() {
        std::vector<FunSignature> out;
        expect_punct("{");
        while (!at_punct("}")) {
            if (at_punct("...")) { consume(); maybe_comma(); continue; }
            out.push_back(parse_fun_decl());
            maybe_comma();
        }
        expect_punct("}");
        return out;
    }

    // A C99-style function declaration: type tokens, name, parameter list.
    FunSignature parse_fun_decl() {
        FunSignature sig;
        std::vector<std::string> ret;
        SourceLoc start = cur_.loc;
        // Tokens up to the identifier that is immediately followed by '('.
        while (true) {
            if (cur_.kind == Tok::End || at_punct("}") || at_punct(","))
                throw ContractError(start, "malformed function declaration");
            if (cur_.kind == Tok::Ident) {
                std::string id = cur_.text;
                consume();
                if (at_punct("(")) { sig.name = id; break; }
                ret.push_back(id);
            } else if (at_punct("*")) {
                ret.push_back("*");
                consume();
            } else if (at_punct(".")) {
                // part of a dotted token inside a type, unlikely; treat verbatim
                ret.push_back(".");
                consume();
            } else {
                throw err("unexpected token '" + cur_.text + "' in function declaration");
            }
        }
        if (ret.empty())
            throw ContractError(start, "missing return type in declaration of '" + sig.name + "'");
        sig.return_type = join(ret);
        expect_punct("(");
        sig.params = parse_param_types();
        expect_punct(")");
        return sig;
    }

    std::vector<std::string> parse_param_types() {
        std::vector<std::string> params;
        if (at_punct(")")) return params;
        while (true) {
            std::vector<std::string> toks;
            int depth = 0;
            while (!(depth == 0 && (at_punct(")") || at_punct(",")))) {
                if (cur_.kind == Tok::End)
                    throw err("unterminated parameter list");
                if (at_punct("(")) ++depth;
                if (at_punct(")")) --depth;
                toks.push_back(cur_.text);
                consume();
            }
            params.push_back(param_type_text(toks));
            if (at_punct(")")) break;
            consume();  // ','
        }
        if (params.size() == 1 && params[0] == "void") params.clear();
        return params;
    }

    // Strip the declared parameter name, keeping the type text.
    static std::string param_type_text(std::vector<std::string> toks) {
        auto is_name = [](const std::string& t) {
            if (t.empty()) return false;
            char c = t[0];
            if (!(std::isalpha(static_cast<unsigned char>(c)) || c == '_')) return false;
            return kTypeKeywords.count(t) == 0;
        };
        // `int a[3]`: drop the identifier preceding the first '['.
        auto bracket = std::find(toks.begin(), toks.end(), "[");
        if (bracket != toks.begin() && bracket != toks.end() && is_name(*(bracket - 1))) {
            toks.erase(bracket - 1);
            return join(toks);
        }
        if (toks.size() >= 2 && is_name(toks.back())) {
            // `tB val`, `void * p`, `const DIAG_TEST test` — but keep a lone
            // typedef name (`DIAG_TEST`) or qualified one (`const tB`) intact:
            // only strip when a type-bearing token remains.
            bool type_left = false;
            for (size_t i = 0; i + 1 < toks.size(); ++i) {
                const std::string& t = toks[i];
                if (t == "const" || t == "volatile") continue;
                if (kTypeKeywords.count(t) || t == "*" || is_name(t)) type_left = true;
            }
            if (type_left) toks.pop_back();
        }
        return join(toks);
    }

    std::vector<ExternalGroup> parse_group_list() {
        std::vector<ExternalGroup> out;
        expect_punct("{");
        while (!at_punct("}")) {
            if (at_punct("...")) { consume(); maybe_comma(); continue; }
            ExternalGroup g;
            g.group_id = expect_name();
            if (at_punct(".")) {  // `rtdb.h` style group id
                consume();
                g.group_id += "." + expect_name();
            }
            g.header_bound = g.group_id.size() > 2 && g.group_id.ends_with(".h");
            expect_punct(":");
            g.decls = parse_fun_decl_list();
            out.push_back(std::move(g));
            maybe_comma();
        }
        expect_punct("}");
        return out;
    }

    std::vector<OrderConstraint> parse_order_list() {
        std::vector<OrderConstraint> out;
        expect_punct("{");
        while (!at_punct("}")) {
            if (at_punct("...")) { consume(); maybe_comma(); continue; }
            std::string lhs = expect_name();
            skip_annotation();
            bool lt;
            if (at_punct("<")) lt = true;
            else if (at_punct(">")) lt = false;
            else throw err("expected '<' or '>' in order constraint");
            consume();
            std::string rhs = expect_name();
            skip_annotation();
            OrderConstraint oc;
            // normalized `<` orientation
            oc.before = lt ? lhs : rhs;
            oc.after = lt ? rhs : lhs;
            out.push_back(std::move(oc));
            maybe_comma();
        }
        expect_punct("}");
        return out;
    }

    // Parenthesized correlation variables, e.g. `tmon_sens_create(X)`, are
    // recorded nowhere: the grammar does not define them, so they are treated
    // as annotations on the identifier.
    void skip_annotation() {
        if (!at_punct("(")) return;
        consume();
        while (!at_punct(")")) {
            if (cur_.kind == Tok::End) throw err("unterminated '(' annotation");
            consume();
        }
        consume();
    }

    static std::string join(const std::vector<std::string>& toks) {
        std::string out;
        for (const auto& t : toks) {
            if (!out.empty()) out += ' ';
            out += t;
        }
        return out;
    }

    bool at_punct(std::string_view p) const { return cur_.kind == Tok::Punct && cur_.text == p; }

    void maybe_comma() {
        if (at_punct(",")) consume();
    }

    void expect_punct(std::string_view p) {
        if (!at_punct(p))
            throw err("expected '" + std::string(p) + "', got '" +
                      (cur_.kind == Tok::End ? "<eof>" : cur_.text) + "'");
        consume();
    }

    void expect_ident(std::string_view kw) {
        if (cur_.kind != Tok::Ident || cur_.text != kw)
            throw err("expected '" + std::string(kw) + "', got '" + cur_.text + "'");
        consume();
    }

    std::string expect_name() {
        if (cur_.kind != Tok::Ident)
            throw err("expected an identifier, got '" + cur_.text + "'");
        std::string n = cur_.text;
        consume();
        return n;
    }

    void consume() { cur_ = lex_.next(); }

    ContractError err(const std::string& msg) const { return ContractError(cur_.loc, msg); }

    Lexer lex_;
    Tok cur_;
    std::set<std::string> seen_;
};

} // namespace

std::string normalize_type_text(std::string_view raw) {
    std::string out;
    bool in_space = true;
    for (size_t i = 0; i < raw.size(); ++i) {
        char c = raw[i];
        if (c == '/' && i + 1 < raw.size() && raw[i + 1] == '/') {
            while (i < raw.size() && raw[i] != '\n') ++i;
            c = ' ';
        } else if (c == '/' && i + 1 < raw.size() && raw[i + 1] == '*') {
            i += 2;
            while (i + 1 < raw.size() && !(raw[i] == '*' && raw[i + 1] == '/')) ++i;
            ++i;
            c = ' ';
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!in_space && !out.empty()) out += ' ';
            in_space = true;
        } else {
            bool word = std::isalnum(static_cast<unsigned char>(c)) || c == '_';
            bool prev_word = !out.empty() &&
                (std::isalnum(static_cast<unsigned char>(out.back())) || out.back() == '_');
            if (!word && !in_space) {
                // separate punctuation tokens (e.g. `int*` -> `int *`)
                if (!out.empty() && out.back() != ' ') out += ' ';
            } else if (word && !in_space && !prev_word) {
                if (!out.empty() && out.back() != ' ') out += ' ';
            }
            out += c;
            in_space = false;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

const FunSignature* ISContract::find_entry(const std::string& name) const {
    for (const auto& e : entry_points)
        if (e.name == name) return &e;
    return nullptr;
}

const FunSignature* ISContract::find_external(const std::string& name) const {
    for (const auto& g : external_groups)
        for (const auto& d : g.decls)
            if (d.name == name) return &d;
    return nullptr;
}

std::optional<std::string> ISContract::external_group_of(const std::string& name) const {
    for (const auto& g : external_groups)
        for (const auto& d : g.decls)
            if (d.name == name) return g.group_id;
    return std::nullopt;
}

ISContract parse_contract(std::string_view text, const std::string& filename) {
    return Parser(text, filename).parse();
}

std::vector<Diagnostic> validate_contract(const ISContract& c) {
    std::vector<Diagnostic> out;
    auto add = [&out](const std::string& subject, const std::string& msg) {
        Diagnostic d;
        d.severity = Severity::Violation;
        d.subject = subject;
        d.message = msg;
        out.push_back(std::move(d));
    };

    std::set<std::string> entries;
    for (const auto& e : c.entry_points)
        if (!entries.insert(e.name).second)
            add(e.name, "duplicate entry point '" + e.name + "'");

    std::set<std::string> externals;
    for (const auto& g : c.external_groups) {
        if (g.decls.empty())
            add(g.group_id, "external group '" + g.group_id + "' declares no functions");
        for (const auto& d : g.decls)
            if (!externals.insert(d.name).second)
                add(d.name, "external function '" + d.name + "' declared more than once");
    }

    for (const auto& oc : c.entry_order) {
        if (oc.before == oc.after)
            add(oc.before, "self-constraint on '" + oc.before + "'");
        for (const auto& id : {oc.before, oc.after})
            if (!entries.count(id)) add(id, "unknown entry point '" + id + "' in entry_order");
    }
    for (const auto& oc : c.external_order) {
        if (oc.before == oc.after)
            add(oc.before, "self-constraint on '" + oc.before + "'");
        for (const auto& id : {oc.before, oc.after})
            if (!externals.count(id))
                add(id, "unknown external function '" + id + "' in external_call_order");
    }

    for (const auto* constraints : {&c.entry_order, &c.external_order}) {
        auto cl = order_closure(*constraints);
        if (cl.has_cycle()) {
            std::string names;
            for (const auto& v : cl.cycle) {
                if (!names.empty()) names += ", ";
                names += v;
            }
            add(cl.cycle.front(), "order constraints form a cycle over {" + names + "}");
        }
    }
    return out;
}

OrderClosure order_closure(const std::vector<OrderConstraint>& constraints) {
    OrderClosure cl;
    std::set<std::string> verts;
    for (const auto& oc : constraints) {
        cl.pairs.insert({oc.before, oc.after});
        verts.insert(oc.before);
        verts.insert(oc.after);
    }
    // Floyd-Warshall style closure; identifier sets are tiny.
    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<std::pair<std::string, std::string>> add;
        for (const auto& [a, b] : cl.pairs)
            for (const auto& [c, d] : cl.pairs)
                if (b == c && !cl.pairs.count({a, d})) add.emplace_back(a, d);
        for (auto& p : add) {
            cl.pairs.insert(std::move(p));
            changed = true;
        }
    }
    for (const auto& v : verts)
        if (cl.pairs.count({v, v})) cl.cycle.push_back(v);
    if (cl.has_cycle()) cl.pairs.clear();
    return cl;
}

std::string signature_text(const FunSignature& s) {
    std::string out = s.return_type + " " + s.name + "(";
    if (s.params.empty()) {
        out += "void";
    } else {
        for (size_t i = 0; i < s.params.size(); ++i) {
            if (i) out += ", ";
            out += s.params[i];
        }
    }
    out += ")";
    return out;
}

std::string render(const ISContract& c) {
    std::ostringstream os;
    os << "module " << c.module_name << " {\n";
    os << "  entry_points: {";
    for (size_t i = 0; i < c.entry_points.size(); ++i)
        os << (i ? ", " : " ") << signature_text(c.entry_points[i]);
    os << (c.entry_points.empty() ? "}" : " }") << "\n";
    os << "  entry_order: {";
    for (size_t i = 0; i < c.entry_order.size(); ++i)
        os << (i ? ", " : " ") << c.entry_order[i].before << " < " << c.entry_order[i].after;
    os << (c.entry_order.empty() ? "}" : " }") << "\n";
    os << "  external_calls: {\n";
    for (const auto& g : c.external_groups) {
        os << "    " << g.group_id << ": {";
        for (size_t i = 0; i < g.decls.size(); ++i)
            os << (i ? ", " : " ") << signature_text(g.decls[i]);
        os << (g.decls.empty() ? "}" : " }") << ",\n";
    }
    os << "  }\n";
    os << "  external_call_order: {";
    for (size_t i = 0; i < c.external_order.size(); ++i)
        os << (i ? ", " : " ") << c.external_order[i].before << " < " << c.external_order[i].after;
    os << (c.external_order.empty() ? "}" : " }") << "\n";
    os << "}\n";
    return os.str();
}

} // namespace modcheck::isc
