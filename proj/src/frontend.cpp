#include "modcheck/frontend.hpp"

#include <algorithm>
#include <cassert>
#include <filesystem>
#include <functional>
#include <memory>

namespace fs = std::filesystem;

namespace modcheck::cfront {

namespace {

// ---------------------------------------------------------------------------
// Types (just enough structure for the pointer/array/function distinctions
// the rules need; no full C type checking)

struct Type;
using TypeP = std::shared_ptr<const Type>;

struct Type {
    enum K { Void, Int, Float, Record, Func, Ptr, Array, Unknown } k = Unknown;
    TypeP elem;  // Ptr / Array
    TypeP ret;   // Func
    int nparams = 0;
    bool variadic = false;

    static TypeP make(K k) {
        auto t = std::make_shared<Type>();
        t->k = k;
        return t;
    }
    static TypeP ptr_to(TypeP e) {
        auto t = std::make_shared<Type>();
        t->k = Ptr;
        t->elem = std::move(e);
        return t;
    }
    static TypeP array_of(TypeP e) {
        auto t = std::make_shared<Type>();
        t->k = Array;
        t->elem = std::move(e);
        return t;
    }
};

bool is_ptr(const TypeP& t) { return t && t->k == Type::Ptr; }
bool is_array(const TypeP& t) { return t && t->k == Type::Array; }
bool is_func(const TypeP& t) { return t && t->k == Type::Func; }
bool is_func_ptr(const TypeP& t) { return is_ptr(t) && is_func(t->elem); }

// ---------------------------------------------------------------------------
// Expressions

struct Expr;
using ExprP = std::unique_ptr<Expr>;

struct Expr {
    enum K {
        IntLit, FloatLit, StrLit, CharLitK, NullConst, Ident, Call, Unary, PostOp,
        Binary, Assign, CondOp, CastOp, Index, Member, Comma, SizeofExpr, SizeofType
    } k;
    std::string text;  // operator, identifier, or literal spelling
    std::vector<ExprP> kids;
    TypeP type;
    SourceLoc loc;
    enum IdKind { IdNone, IdLocal, IdGlobal, IdFunc, IdEnum, IdUnknown } idkind = IdNone;
    bool via_pointer_call = false;
    int call_arity = 0;

    Expr(K kk, SourceLoc l) : k(kk), loc(std::move(l)) {}
};

ExprP mk(Expr::K k, SourceLoc loc) { return std::make_unique<Expr>(k, std::move(loc)); }

// ---------------------------------------------------------------------------
// Symbols

struct Sym {
    enum K { Var, Function, EnumConst, TypedefName } k = Var;
    TypeP type;
    bool module_global = false;  // file-scope variable of the module itself
};

const std::set<std::string> kBaseTypeKw = {"void",  "char",   "short",  "int",   "long",
                                           "float", "double", "signed", "unsigned", "_Bool"};
const std::set<std::string> kRawBaseKw = {"char",  "short",  "int",   "long",
                                          "float", "double", "signed", "unsigned"};
const std::set<std::string> kStorageKw = {"static", "extern", "typedef", "register", "inline",
                                          "auto"};
const std::set<std::string> kQualKw = {"const", "volatile", "restrict"};

// ---------------------------------------------------------------------------
// CFG builder

class CfgBuilder {
public:
    CfgBuilder() {
        cfg_.blocks.emplace_back();  // entry
        cfg_.blocks.emplace_back();  // exit
        cfg_.entry = 0;
        cfg_.exit = 1;
        cur_ = 0;
    }

    int new_block() {
        cfg_.blocks.emplace_back();
        return static_cast<int>(cfg_.blocks.size()) - 1;
    }

    void edge(int from, int to, bool back = false) {
        auto& s = cfg_.blocks[from].succs;
        if (std::find(s.begin(), s.end(), to) == s.end()) s.push_back(to);
        if (back) cfg_.back_edges.insert({from, to});
    }

    void emit(Event e) { cfg_.blocks[cur_].events.push_back(std::move(e)); }

    int cur() const { return cur_; }
    void set_cur(int b) { cur_ = b; }

    void to_exit() {
        edge(cur_, cfg_.exit);
        cur_ = new_block();  // unreachable continuation, pruned later
    }

    Cfg finish() {
        edge(cur_, cfg_.exit);
        prune_unreachable();
        return std::move(cfg_);
    }

private:
    void prune_unreachable() {
        std::vector<bool> seen(cfg_.blocks.size(), false);
        std::vector<int> stack{cfg_.entry};
        seen[cfg_.entry] = true;
        while (!stack.empty()) {
            int b = stack.back();
            stack.pop_back();
            for (int s : cfg_.blocks[b].succs)
                if (!seen[s]) {
                    seen[s] = true;
                    stack.push_back(s);
                }
        }
        seen[cfg_.exit] = true;  // keep exit even if nothing falls through
        std::vector<int> remap(cfg_.blocks.size(), -1);
        Cfg out;
        out.blocks.clear();
        for (size_t i = 0; i < cfg_.blocks.size(); ++i) {
            if (!seen[i]) continue;
            remap[i] = static_cast<int>(out.blocks.size());
            out.blocks.push_back(std::move(cfg_.blocks[i]));
        }
        for (auto& b : out.blocks) {
            std::vector<int> succs;
            for (int s : b.succs)
                if (remap[s] >= 0) succs.push_back(remap[s]);
            b.succs = std::move(succs);
        }
        for (const auto& [f, t] : cfg_.back_edges)
            if (remap[f] >= 0 && remap[t] >= 0) out.back_edges.insert({remap[f], remap[t]});
        out.entry = remap[cfg_.entry];
        out.exit = remap[cfg_.exit];
        cfg_ = std::move(out);
    }

    Cfg cfg_;
    int cur_;
};

// ---------------------------------------------------------------------------
// Parser

class ModuleParser {
public:
    ModuleParser(CModule& m, std::vector<CTok> tokens, const PreprocConfig& cfg,
                 std::string h_canon, std::string c_canon,
                 std::map<std::string, Sym> seed = {})
        : m_(m), toks_(std::move(tokens)), cfg_(cfg),
          h_canon_(std::move(h_canon)), c_canon_(std::move(c_canon)) {
        // seed the file scope with what an earlier unit (the header) declared;
        // the fixtures' .c files do not necessarily #include their own .h
        scopes_.push_back(std::move(seed));
    }

    void parse_translation_unit() {
        while (!at_end()) parse_external_declaration();
        check_no_recursion();
    }

    std::map<std::string, Sym> take_file_scope() { return std::move(scopes_.front()); }

private:
    // ------------------------------------------------------------ utilities

    DeclaredIn classify(const SourceLoc& loc) {
        auto it = class_cache_.find(loc.file);
        if (it != class_cache_.end()) return it->second;
        std::error_code ec;
        std::string canon = fs::weakly_canonical(loc.file, ec).string();
        DeclaredIn d = DeclaredIn::External;
        if (canon == h_canon_) d = DeclaredIn::Header;
        else if (canon == c_canon_) d = DeclaredIn::Source;
        class_cache_[loc.file] = d;
        return d;
    }

    bool in_module(const SourceLoc& loc) { return classify(loc) != DeclaredIn::External; }

    const CTok& cur() const { return pos_ < toks_.size() ? toks_[pos_] : eof_; }
    const CTok& peek(size_t n = 1) const {
        return pos_ + n < toks_.size() ? toks_[pos_ + n] : eof_;
    }
    bool at_end() const { return pos_ >= toks_.size(); }
    bool at(std::string_view t) const { return cur().text == t && cur().kind != CTok::String; }
    bool at_punct(std::string_view t) const { return cur().is_punct(t); }

    void advance() { ++pos_; }

    void expect(std::string_view t) {
        if (!at(t))
            throw FrontendError(cur().loc, "expected '" + std::string(t) + "', got '" +
                                               (at_end() ? "<eof>" : cur().text) + "'");
        advance();
    }

    [[noreturn]] void unsupported(const std::string& what) {
        throw FrontendError(cur().loc, "unsupported construct: " + what, true);
    }

    Sym* lookup(const std::string& name) {
        for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
            auto f = it->find(name);
            if (f != it->end()) return &f->second;
        }
        return nullptr;
    }

    void declare(const std::string& name, Sym s) { scopes_.back()[name] = std::move(s); }

    void flag(ConstructFlag::Kind k, const SourceLoc& loc, const std::string& subject,
              const std::string& detail = "") {
        if (!in_module(loc)) return;
        m_.construct_flags.push_back({k, loc, subject, detail});
    }

    // ------------------------------------------------- declaration specifiers

    struct DeclSpec {
        bool is_static = false;
        bool is_extern = false;
        bool is_typedef = false;
        TypeP type;
        std::vector<std::string> type_tokens;  // without storage classes
        std::vector<std::string> raw_base;     // raw base-type keywords used
        SourceLoc loc;
        bool any = false;
    };

    bool starts_type(const CTok& t) {
        if (t.kind != CTok::Ident) return false;
        if (kBaseTypeKw.count(t.text) || kQualKw.count(t.text) || kStorageKw.count(t.text))
            return true;
        if (t.text == "struct" || t.text == "union" || t.text == "enum") return true;
        const Sym* s = const_cast<ModuleParser*>(this)->lookup(t.text);
        return s && s->k == Sym::TypedefName;
    }

    DeclSpec parse_decl_specifiers() {
        DeclSpec ds;
        ds.loc = cur().loc;
        bool have_base = false;
        while (true) {
            if (cur().kind != CTok::Ident) break;
            const std::string& t = cur().text;
            if (t == "_Generic") unsupported("_Generic");
            if (kStorageKw.count(t)) {
                if (t == "static") ds.is_static = true;
                else if (t == "extern") ds.is_extern = true;
                else if (t == "typedef") ds.is_typedef = true;
                ds.any = true;
                advance();
                continue;
            }
            if (kQualKw.count(t)) {
                ds.type_tokens.push_back(t);
                ds.any = true;
                advance();
                continue;
            }
            if (kBaseTypeKw.count(t)) {
                if (kRawBaseKw.count(t)) ds.raw_base.push_back(t);
                ds.type_tokens.push_back(t);
                TypeP base = (t == "void") ? Type::make(Type::Void)
                             : (t == "float" || t == "double") ? Type::make(Type::Float)
                                                               : Type::make(Type::Int);
                // combine multi-keyword bases: keep the widest classification
                if (!have_base || base->k == Type::Float) ds.type = base;
                have_base = true;
                ds.any = true;
                advance();
                continue;
            }
            if (t == "struct" || t == "union") {
                ds.type_tokens.push_back(t);
                advance();
                if (cur().kind == CTok::Ident && !at_punct("{")) {
                    ds.type_tokens.push_back(cur().text);
                    advance();
                }
                if (at_punct("{")) parse_struct_body();
                ds.type = Type::make(Type::Record);
                have_base = ds.any = true;
                continue;
            }
            if (t == "enum") {
                ds.type_tokens.push_back(t);
                advance();
                if (cur().kind == CTok::Ident) {
                    ds.type_tokens.push_back(cur().text);
                    advance();
                }
                if (at_punct("{")) parse_enum_body();
                ds.type = Type::make(Type::Int);
                have_base = ds.any = true;
                continue;
            }
            if (!have_base) {
                Sym* s = lookup(t);
                if (s && s->k == Sym::TypedefName) {
                    ds.type_tokens.push_back(t);
                    ds.type = s->type;
                    have_base = ds.any = true;
                    advance();
                    continue;
                }
            }
            break;
        }
        if (!have_base && ds.any) ds.type = Type::make(Type::Int);  // implicit int
        return ds;
    }

    void parse_struct_body() {
        expect("{");
        while (!at_punct("}")) {
            if (at_end()) throw FrontendError(cur().loc, "unterminated struct body");
            DeclSpec ds = parse_decl_specifiers();
            if (!ds.any) throw FrontendError(cur().loc, "expected a field declaration");
            while (true) {
                Declr d = parse_declarator(ds);
                if (!ds.raw_base.empty() && in_module(ds.loc))
                    m_.raw_type_uses.push_back({join(ds.raw_base), "field", "", d.loc});
                if (at_punct(":")) {  // bit-field width
                    advance();
                    skip_constant_expr();
                }
                if (at_punct(",")) { advance(); continue; }
                break;
            }
            expect(";");
        }
        expect("}");
    }

    void parse_enum_body() {
        expect("{");
        while (!at_punct("}")) {
            if (cur().kind != CTok::Ident)
                throw FrontendError(cur().loc, "expected an enumerator name");
            std::string name = cur().text;
            advance();
            if (at_punct("=")) {
                advance();
                skip_constant_expr();
            }
            declare(name, {Sym::EnumConst, Type::make(Type::Int), false});
            if (at_punct(",")) advance();
        }
        expect("}");
    }

    // constant expressions in enum values / bit-fields / array sizes are
    // skipped, not evaluated
    void skip_constant_expr() {
        int depth = 0;
        while (!at_end()) {
            if (at_punct("(") || at_punct("[")) ++depth;
            else if (at_punct(")") || at_punct("]")) {
                if (depth == 0) return;
                --depth;
            } else if (depth == 0 && (at_punct(",") || at_punct(";") || at_punct("}") ||
                                      at_punct(":"))) {
                return;
            }
            advance();
        }
    }

    // ------------------------------------------------------------ declarators

    struct ParamInfo {
        std::string type_text;  // normalized, name stripped
        std::string name;       // may be empty
        TypeP type;
        std::vector<std::string> raw_base;
        SourceLoc loc;
    };

    struct Declr {
        std::string name;
        TypeP type;
        SourceLoc loc;
        bool is_function = false;
        bool fn_ptr_decl = false;  // declarator declares a function pointer
        std::vector<ParamInfo> params;
        bool variadic = false;
        int stars = 0;
    };

    Declr parse_declarator(const DeclSpec& ds) {
        Declr d;
        d.loc = cur().loc;
        d.type = ds.type ? ds.type : Type::make(Type::Unknown);
        parse_declarator_inner(d);
        return d;
    }

    void parse_declarator_inner(Declr& d) {
        while (at_punct("*")) {
            d.type = Type::ptr_to(d.type);
            ++d.stars;
            advance();
            while (cur().kind == CTok::Ident && kQualKw.count(cur().text)) advance();
        }
        bool grouped = false;
        size_t group_pos = 0;
        if (at_punct("(")) {
            // parenthesized declarator (function pointer / grouping); remember
            // and re-parse after suffixes are known
            grouped = true;
            advance();
            group_pos = pos_;
            int depth = 0;
            while (!at_end()) {
                if (at_punct("(")) ++depth;
                else if (at_punct(")")) {
                    if (depth == 0) break;
                    --depth;
                }
                advance();
            }
            expect(")");
        } else if (cur().kind == CTok::Ident && !kBaseTypeKw.count(cur().text) &&
                   !kQualKw.count(cur().text)) {
            d.name = cur().text;
            d.loc = cur().loc;
            advance();
        }
        // suffixes
        while (true) {
            if (at_punct("(")) {
                advance();
                parse_param_list(d);
                auto ft = std::make_shared<Type>();
                ft->k = Type::Func;
                ft->ret = d.type;
                ft->nparams = static_cast<int>(d.params.size());
                ft->variadic = d.variadic;
                d.type = ft;
                d.is_function = true;
            } else if (at_punct("[")) {
                advance();
                check_array_size();
                d.type = Type::array_of(d.type);
            } else {
                break;
            }
        }
        if (grouped) {
            // re-parse the grouped inner declarator against the suffix type
            size_t save = pos_;
            pos_ = group_pos;
            Declr inner;
            inner.type = d.type;
            inner.loc = cur().loc;
            parse_declarator_inner(inner);
            if (!at_punct(")"))
                throw FrontendError(cur().loc, "malformed parenthesized declarator");
            pos_ = save;
            d.name = inner.name;
            d.loc = inner.loc.file.empty() ? d.loc : inner.loc;
            d.type = inner.type;
            d.is_function = false;
            if (is_func_ptr(d.type) || (is_array(d.type) && is_func_ptr(d.type->elem))) {
                d.fn_ptr_decl = true;
                flag(ConstructFlag::FunctionPointer, d.loc, d.name,
                     "function-pointer declarator");
            }
        }
    }

    void check_array_size() {
        // VLAs are out of subset: a size expression mentioning anything that
        // is not a number or an enum constant is rejected
        while (!at_punct("]")) {
            if (at_end()) throw FrontendError(cur().loc, "unterminated array declarator");
            if (cur().kind == CTok::Ident) {
                Sym* s = lookup(cur().text);
                if (!s || s->k != Sym::EnumConst)
                    unsupported("variable length array (size '" + cur().text + "')");
            }
            advance();
        }
        expect("]");
    }

    void parse_param_list(Declr& d) {
        if (at_punct(")")) {
            advance();
            return;
        }
        while (true) {
            if (at_punct("...")) {
                d.variadic = true;
                advance();
                break;
            }
            DeclSpec ds = parse_decl_specifiers();
            if (!ds.any)
                throw FrontendError(cur().loc, "expected a parameter declaration");
            size_t text_start = pos_;
            Declr pd = parse_declarator(ds);
            ParamInfo p;
            p.name = pd.name;
            p.type = pd.type;
            p.raw_base = ds.raw_base;
            p.loc = pd.loc;
            // normalized type text: specifier tokens plus declarator tokens
            // minus the parameter name
            std::vector<std::string> t = ds.type_tokens;
            for (size_t i = text_start; i < pos_; ++i)
                if (toks_[i].text != pd.name || toks_[i].kind != CTok::Ident)
                    t.push_back(toks_[i].text);
            p.type_text = join(t);
            if (pd.fn_ptr_decl || is_func_ptr(pd.type))
                flag(ConstructFlag::FunctionPointer, pd.loc, pd.name.empty() ? "<param>" : pd.name,
                     "function-pointer parameter");
            d.params.push_back(std::move(p));
            if (at_punct(",")) { advance(); continue; }
            break;
        }
        expect(")");
        if (d.params.size() == 1 && d.params[0].type_text == "void" && d.params[0].name.empty())
            d.params.clear();
    }

    static std::string join(const std::vector<std::string>& v) {
        std::string out;
        for (const auto& s : v) {
            if (!out.empty()) out += ' ';
            out += s;
        }
        return out;
    }

    FunSig make_signature(const DeclSpec& ds, const Declr& d) {
        FunSig sig;
        sig.name = d.name;
        std::vector<std::string> ret = ds.type_tokens;
        for (int i = 0; i < d.stars; ++i) ret.push_back("*");
        sig.return_type = join(ret);
        for (const auto& p : d.params) sig.params.push_back(p.type_text);
        sig.variadic = d.variadic;
        return sig;
    }

    // --------------------------------------------------- external declarations

    void parse_external_declaration() {
        if (at_punct(";")) { advance(); return; }
        DeclSpec ds = parse_decl_specifiers();
        if (!ds.any)
            throw FrontendError(cur().loc, "expected a declaration, got '" + cur().text + "'");
        if (at_punct(";")) {  // bare struct/union/enum declaration
            advance();
            return;
        }
        bool first = true;
        while (true) {
            Declr d = parse_declarator(ds);
            if (d.name.empty())
                throw FrontendError(d.loc, "expected a declared name");
            if (ds.is_typedef) {
                handle_typedef(ds, d);
            } else if (d.is_function) {
                if (first && at_punct("{")) {
                    handle_function(ds, d, /*definition=*/true);
                    return;  // no declarator list after a definition
                }
                handle_function(ds, d, /*definition=*/false);
            } else {
                handle_global(ds, d);
            }
            first = false;
            if (at_punct(",")) { advance(); continue; }
            expect(";");
            return;
        }
    }

    void handle_typedef(const DeclSpec& ds, const Declr& d) {
        declare(d.name, {Sym::TypedefName, d.type, false});
        if (in_module(d.loc)) {
            std::vector<std::string> t = ds.type_tokens;
            for (int i = 0; i < d.stars; ++i) t.push_back("*");
            m_.typedefs.emplace_back(d.name, join(t));
        }
        // raw base keywords inside typedef definitions are the point of a
        // typedef; not recorded
    }

    void handle_global(const DeclSpec& ds, const Declr& d) {
        DeclaredIn where = classify(d.loc);
        bool extern_decl = ds.is_extern;
        declare(d.name, {Sym::Var, d.type, where != DeclaredIn::External && !extern_decl});

        bool has_init = at_punct("=");
        if (has_init) {
            advance();
            parse_initializer(d);
        }
        if (where == DeclaredIn::External) return;

        if (ds.is_extern)
            flag(ConstructFlag::ExternKeyword, d.loc, d.name, "variable-declaration");
        if (!ds.is_extern) {
            GlobalVar g;
            g.name = d.name;
            std::vector<std::string> t = ds.type_tokens;
            for (int i = 0; i < d.stars; ++i) t.push_back("*");
            g.type_text = join(t);
            g.is_static = ds.is_static;
            g.has_initializer = has_init;
            g.declared_in = where;
            g.loc = d.loc;
            bool dup = false;
            for (auto& prev : m_.globals)
                if (prev.name == g.name && prev.loc == g.loc) dup = true;
            if (!dup) m_.globals.push_back(std::move(g));
        }
        if (!ds.raw_base.empty())
            m_.raw_type_uses.push_back({join(ds.raw_base), "global", "", d.loc});
        if (where == DeclaredIn::Header && has_init)
            m_.header_defs.push_back({HeaderDef::VariableInitialization, d.name, d.loc});
    }

    // initializer of a (possibly local) variable; emits events into builder_
    // when inside a function body
    void parse_initializer(const Declr& d) {
        if (at_punct("{")) {
            if (!is_array(d.type) && d.type && d.type->k != Type::Record &&
                d.type->k != Type::Unknown) {
                // scalar brace init; fall through to skipping
            }
            skip_braced();
            return;
        }
        ExprP e = parse_assign_expr();
        if (is_ptr(d.type) && is_integer_literal(*e) && e->k != Expr::NullConst)
            flag(ConstructFlag::PointerLiteral, e->loc, d.name, e->text);
        if (builder_) lower(*e);
    }

    void skip_braced() {
        expect("{");
        int depth = 0;
        while (!at_end()) {
            if (at_punct("{")) ++depth;
            else if (at_punct("}")) {
                if (depth == 0) { advance(); return; }
                --depth;
            }
            advance();
        }
        throw FrontendError(cur().loc, "unterminated initializer");
    }

    static bool is_integer_literal(const Expr& e) {
        if (e.k == Expr::IntLit) return true;
        if (e.k == Expr::CastOp && e.kids.size() == 1) return is_integer_literal(*e.kids[0]);
        return false;
    }

    void handle_function(const DeclSpec& ds, const Declr& d, bool definition) {
        DeclaredIn where = classify(d.loc);
        declare(d.name, {Sym::Function, d.type, false});

        if (where == DeclaredIn::External) {
            if (definition) {
                // definitions in third-party headers are skimmed, not analyzed
                skip_braced();
            }
            ExternalDecl ed;
            ed.signature = make_signature(ds, d);
            ed.header_basename = fs::path(d.loc.file).filename().string();
            ed.loc = d.loc;
            m_.ext_decls.emplace(d.name, std::move(ed));
            return;
        }

        if (ds.is_extern)
            flag(ConstructFlag::ExternKeyword, d.loc, d.name, "function-declaration");

        FunDeclSite site;
        site.signature = make_signature(ds, d);
        site.is_static = ds.is_static;
        site.is_extern_kw = ds.is_extern;
        site.declared_in = where;
        site.is_definition = definition;
        site.loc = d.loc;
        bool dup = false;
        for (const auto& prev : m_.decls)
            if (prev.signature.name == d.name && prev.loc == d.loc &&
                prev.is_definition == definition)
                dup = true;
        if (!dup) m_.decls.push_back(site);

        if (!ds.raw_base.empty())
            m_.raw_type_uses.push_back({join(ds.raw_base), "return", d.name, d.loc});
        for (const auto& p : d.params)
            if (!p.raw_base.empty())
                m_.raw_type_uses.push_back({join(p.raw_base), "param", d.name, p.loc});

        if (!definition) return;

        if (where == DeclaredIn::Header)
            m_.header_defs.push_back({HeaderDef::FunctionDefinition, d.name, d.loc});
        if (d.variadic) unsupported("variadic function definition");

        // function body
        current_fn_ = d.name;
        CfgBuilder b;
        builder_ = &b;
        scopes_.emplace_back();
        for (const auto& p : d.params)
            if (!p.name.empty()) declare(p.name, {Sym::Var, p.type, false});
        parse_compound();
        scopes_.pop_back();
        builder_ = nullptr;
        Cfg cfg = b.finish();
        check_cfg_wellformed(cfg);
        if (m_.defs.count(d.name))
            throw FrontendError(d.loc, "redefinition of function '" + d.name + "'");
        m_.defs[d.name] = std::move(cfg);
        current_fn_.clear();
    }

    // -------------------------------------------------------------- statements

    struct LoopCtx {
        int break_target;
        int continue_target;
    };

    void parse_compound() {
        expect("{");
        scopes_.emplace_back();
        while (!at_punct("}")) {
            if (at_end()) throw FrontendError(cur().loc, "unterminated compound statement");
            parse_statement();
        }
        scopes_.pop_back();
        expect("}");
    }

    void parse_statement() {
        CfgBuilder& b = *builder_;
        if (at_punct("{")) {
            parse_compound();
            return;
        }
        if (at_punct(";")) { advance(); return; }
        if (at("goto")) unsupported("goto");
        if (at("if")) { parse_if(); return; }
        if (at("while")) { parse_while(); return; }
        if (at("do")) { parse_do(); return; }
        if (at("for")) { parse_for(); return; }
        if (at("switch")) { parse_switch(); return; }
        if (at("return")) {
            advance();
            if (!at_punct(";")) {
                ExprP e = parse_expression();
                lower(*e);
            }
            expect(";");
            b.to_exit();
            return;
        }
        if (at("break")) {
            advance();
            expect(";");
            if (loops_.empty()) throw FrontendError(cur().loc, "'break' outside loop or switch");
            b.edge(b.cur(), loops_.back().break_target);
            b.set_cur(b.new_block());
            return;
        }
        if (at("continue")) {
            advance();
            expect(";");
            const LoopCtx* ctx = nullptr;
            for (auto it = loops_.rbegin(); it != loops_.rend(); ++it)
                if (it->continue_target >= 0) { ctx = &*it; break; }
            if (!ctx) throw FrontendError(cur().loc, "'continue' outside loop");
            bool back = ctx->continue_target <= b.cur();
            b.edge(b.cur(), ctx->continue_target, back);
            b.set_cur(b.new_block());
            return;
        }
        if (cur().kind == CTok::Ident && peek().is_punct(":") && !at("default"))
            unsupported("label");
        if (starts_type(cur()) && !at("extern") && cur().text != "typedef")
            { parse_local_declaration(); return; }
        if (at("extern")) {
            // block-scope extern declaration
            parse_local_declaration();
            return;
        }
        if (at("typedef")) { parse_local_declaration(); return; }
        ExprP e = parse_expression();
        lower(*e);
        expect(";");
    }

    void parse_local_declaration() {
        DeclSpec ds = parse_decl_specifiers();
        if (ds.is_typedef) {
            Declr d = parse_declarator(ds);
            handle_typedef(ds, d);
            expect(";");
            return;
        }
        while (true) {
            Declr d = parse_declarator(ds);
            if (d.name.empty()) throw FrontendError(d.loc, "expected a declared name");
            if (ds.is_extern)
                flag(ConstructFlag::ExternKeyword, d.loc, d.name, "block-scope declaration");
            declare(d.name, {d.is_function ? Sym::Function : Sym::Var, d.type, false});
            if (!ds.raw_base.empty() && !d.is_function)
                m_.raw_type_uses.push_back({join(ds.raw_base), "local", current_fn_, d.loc});
            if (at_punct("=")) {
                advance();
                parse_initializer(d);
            }
            if (at_punct(",")) { advance(); continue; }
            break;
        }
        expect(";");
    }

    void parse_if() {
        CfgBuilder& b = *builder_;
        expect("if");
        expect("(");
        ExprP c = parse_expression();
        lower(*c);
        expect(")");
        int head = b.cur();
        int then_b = b.new_block();
        b.edge(head, then_b);
        b.set_cur(then_b);
        parse_statement();
        int then_end = b.cur();
        if (at("else")) {
            advance();
            int else_b = b.new_block();
            b.edge(head, else_b);
            b.set_cur(else_b);
            parse_statement();
            int else_end = b.cur();
            int join = b.new_block();
            b.edge(then_end, join);
            b.edge(else_end, join);
            b.set_cur(join);
        } else {
            int join = b.new_block();
            b.edge(head, join);
            b.edge(then_end, join);
            b.set_cur(join);
        }
    }

    void parse_while() {
        CfgBuilder& b = *builder_;
        expect("while");
        int header = b.new_block();
        b.edge(b.cur(), header);
        b.set_cur(header);
        expect("(");
        ExprP c = parse_expression();
        lower(*c);
        expect(")");
        header = b.cur();  // condition lowering may have split blocks
        int exit_b = b.new_block();
        int body = b.new_block();
        b.edge(header, body);
        b.edge(header, exit_b);
        loops_.push_back({exit_b, header});
        b.set_cur(body);
        parse_statement();
        b.edge(b.cur(), header, /*back=*/true);
        loops_.pop_back();
        b.set_cur(exit_b);
    }

    void parse_do() {
        CfgBuilder& b = *builder_;
        expect("do");
        int body = b.new_block();
        b.edge(b.cur(), body);
        int cond_b = b.new_block();
        int exit_b = b.new_block();
        loops_.push_back({exit_b, cond_b});
        b.set_cur(body);
        parse_statement();
        b.edge(b.cur(), cond_b);
        loops_.pop_back();
        b.set_cur(cond_b);
        expect("while");
        expect("(");
        ExprP c = parse_expression();
        lower(*c);
        expect(")");
        expect(";");
        b.edge(b.cur(), body, /*back=*/true);
        b.edge(b.cur(), exit_b);
        b.set_cur(exit_b);
    }

    void parse_for() {
        CfgBuilder& b = *builder_;
        expect("for");
        expect("(");
        scopes_.emplace_back();
        if (!at_punct(";")) {
            if (starts_type(cur())) {
                parse_local_declaration();  // consumes ';'
            } else {
                ExprP init = parse_expression();
                lower(*init);
                expect(";");
            }
        } else {
            advance();
        }
        int header = b.new_block();
        b.edge(b.cur(), header);
        b.set_cur(header);
        if (!at_punct(";")) {
            ExprP c = parse_expression();
            lower(*c);
        }
        expect(";");
        header = b.cur();
        int exit_b = b.new_block();
        int inc_b = b.new_block();
        // increment expression is parsed now but lowered after the body
        size_t inc_start = pos_;
        int depth = 0;
        while (!at_end() && !(depth == 0 && at_punct(")"))) {
            if (at_punct("(")) ++depth;
            else if (at_punct(")")) --depth;
            advance();
        }
        size_t inc_end = pos_;
        expect(")");
        int body = b.new_block();
        b.edge(header, body);
        b.edge(header, exit_b);
        loops_.push_back({exit_b, inc_b});
        b.set_cur(body);
        parse_statement();
        b.edge(b.cur(), inc_b);
        loops_.pop_back();
        b.set_cur(inc_b);
        if (inc_end > inc_start) {
            size_t save = pos_;
            pos_ = inc_start;
            ExprP inc = parse_expression();
            lower(*inc);
            pos_ = save;
        }
        b.edge(b.cur(), header, /*back=*/true);
        scopes_.pop_back();
        b.set_cur(exit_b);
    }

    void parse_switch() {
        CfgBuilder& b = *builder_;
        expect("switch");
        expect("(");
        ExprP c = parse_expression();
        lower(*c);
        expect(")");
        int head = b.cur();
        int exit_b = b.new_block();
        expect("{");
        scopes_.emplace_back();
        loops_.push_back({exit_b, -1});
        bool has_default = false;
        bool in_case = false;
        while (!at_punct("}")) {
            if (at_end()) throw FrontendError(cur().loc, "unterminated switch body");
            if (at("case") || at("default")) {
                bool dflt = at("default");
                advance();
                if (!dflt) skip_constant_expr();
                expect(":");
                int cb = b.new_block();
                if (in_case) b.edge(b.cur(), cb);  // fallthrough
                b.edge(head, cb);
                b.set_cur(cb);
                in_case = true;
                if (dflt) has_default = true;
                continue;
            }
            if (!in_case) {
                // statements before the first label are unreachable
                b.set_cur(b.new_block());
                in_case = true;
            }
            parse_statement();
        }
        expect("}");
        if (in_case) b.edge(b.cur(), exit_b);
        if (!has_default) b.edge(head, exit_b);
        loops_.pop_back();
        scopes_.pop_back();
        b.set_cur(exit_b);
    }

    // ------------------------------------------------------------- expressions

    ExprP parse_expression() {
        ExprP e = parse_assign_expr();
        while (at_punct(",")) {
            SourceLoc loc = cur().loc;
            advance();
            ExprP rhs = parse_assign_expr();
            ExprP c = mk(Expr::Comma, loc);
            c->type = rhs->type;
            c->kids.push_back(std::move(e));
            c->kids.push_back(std::move(rhs));
            e = std::move(c);
        }
        return e;
    }

    bool at_assign_op() const {
        return at_punct("=") || at_punct("+=") || at_punct("-=") || at_punct("*=") ||
               at_punct("/=") || at_punct("%=") || at_punct("&=") || at_punct("|=") ||
               at_punct("^=") || at_punct("<<=") || at_punct(">>=");
    }

    ExprP parse_assign_expr() {
        ExprP lhs = parse_conditional();
        if (!at_assign_op()) return lhs;
        std::string op = cur().text;
        SourceLoc loc = cur().loc;
        advance();
        ExprP rhs = parse_assign_expr();
        if ((op == "+=" || op == "-=") && (is_ptr(lhs->type)))
            flag(ConstructFlag::PointerArith, loc, ident_of(*lhs), op);
        if (op == "=" && is_ptr(lhs->type) && is_integer_literal(*rhs))
            flag(ConstructFlag::PointerLiteral, rhs->loc, ident_of(*lhs), rhs->text);
        ExprP a = mk(Expr::Assign, loc);
        a->text = op;
        a->type = lhs->type;
        a->kids.push_back(std::move(lhs));
        a->kids.push_back(std::move(rhs));
        return a;
    }

    ExprP parse_conditional() {
        ExprP c = parse_binary(0);
        if (!at_punct("?")) return c;
        SourceLoc loc = cur().loc;
        advance();
        ExprP t = parse_expression();
        expect(":");
        ExprP f = parse_conditional();
        ExprP e = mk(Expr::CondOp, loc);
        e->type = t->type;
        e->kids.push_back(std::move(c));
        e->kids.push_back(std::move(t));
        e->kids.push_back(std::move(f));
        return e;
    }

    struct BinOp {
        const char* tok;
        int prec;
    };

    static constexpr BinOp kBinOps[] = {
        {"||", 1}, {"&&", 2}, {"|", 3}, {"^", 4}, {"&", 5},
        {"==", 6}, {"!=", 6}, {"<", 7}, {"<=", 7}, {">", 7}, {">=", 7},
        {"<<", 8}, {">>", 8}, {"+", 9}, {"-", 9}, {"*", 10}, {"/", 10}, {"%", 10}};

    int bin_prec() const {
        if (cur().kind != CTok::Punct) return -1;
        for (const auto& b : kBinOps)
            if (cur().text == b.tok) return b.prec;
        return -1;
    }

    ExprP parse_binary(int min_prec) {
        ExprP lhs = parse_cast_expr();
        while (true) {
            int prec = bin_prec();
            if (prec < 0 || prec < min_prec) break;
            std::string op = cur().text;
            SourceLoc loc = cur().loc;
            advance();
            ExprP rhs = parse_binary(prec + 1);
            if ((op == "+" || op == "-") &&
                (is_ptr(lhs->type) || is_ptr(rhs->type) || is_array(lhs->type) ||
                 is_array(rhs->type)))
                flag(ConstructFlag::PointerArith, loc,
                     ident_of(*lhs).empty() ? ident_of(*rhs) : ident_of(*lhs), op);
            ExprP e = mk(Expr::Binary, loc);
            e->text = op;
            if (op == "+" || op == "-" || op == "*" || op == "/")
                e->type = (lhs->type && lhs->type->k == Type::Float) ? lhs->type : rhs->type;
            else
                e->type = Type::make(Type::Int);
            e->kids.push_back(std::move(lhs));
            e->kids.push_back(std::move(rhs));
            lhs = std::move(e);
        }
        return lhs;
    }

    bool at_type_name_start() {
        if (cur().kind != CTok::Ident) return false;
        const std::string& t = cur().text;
        if (kBaseTypeKw.count(t) || kQualKw.count(t) || t == "struct" || t == "union" ||
            t == "enum")
            return true;
        Sym* s = lookup(t);
        return s && s->k == Sym::TypedefName;
    }

    ExprP parse_cast_expr() {
        if (at_punct("(")) {
            size_t save = pos_;
            advance();
            if (at_type_name_start()) {
                SourceLoc loc = toks_[save].loc;
                TypeP ty = parse_type_name();
                expect(")");
                if (at_punct("{")) unsupported("compound literal");
                ExprP operand = parse_cast_expr();
                if (is_ptr(ty) || is_ptr(operand->type))
                    flag(ConstructFlag::PointerCast, loc, ident_of(*operand),
                         is_ptr(ty) ? "to-pointer" : "from-pointer");
                if (is_ptr(ty) && is_integer_literal(*operand))
                    flag(ConstructFlag::PointerLiteral, operand->loc, ident_of(*operand),
                         operand->text);
                ExprP e = mk(Expr::CastOp, loc);
                e->type = ty;
                e->kids.push_back(std::move(operand));
                return e;
            }
            pos_ = save;
        }
        return parse_unary();
    }

    TypeP parse_type_name() {
        DeclSpec ds = parse_decl_specifiers();
        Declr d = parse_declarator(ds);  // abstract declarator
        return d.type;
    }

    ExprP parse_unary() {
        SourceLoc loc = cur().loc;
        if (at_punct("++") || at_punct("--")) {
            std::string op = cur().text;
            advance();
            ExprP operand = parse_unary();
            if (is_ptr(operand->type))
                flag(ConstructFlag::PointerArith, loc, ident_of(*operand), op);
            ExprP e = mk(Expr::Unary, loc);
            e->text = op;
            e->type = operand->type;
            e->kids.push_back(std::move(operand));
            return e;
        }
        if (at_punct("&")) {
            advance();
            ExprP operand = parse_cast_expr();
            if (operand->k == Expr::Ident && operand->idkind == Expr::IdGlobal)
                m_.address_taken_globals.insert(operand->text);
            ExprP e = mk(Expr::Unary, loc);
            e->text = "&";
            e->type = Type::ptr_to(operand->type);
            e->kids.push_back(std::move(operand));
            return e;
        }
        if (at_punct("*")) {
            advance();
            ExprP operand = parse_cast_expr();
            ExprP e = mk(Expr::Unary, loc);
            e->text = "*";
            e->type = (operand->type && operand->type->elem) ? operand->type->elem
                                                             : Type::make(Type::Unknown);
            e->kids.push_back(std::move(operand));
            return e;
        }
        if (at_punct("!") || at_punct("~") || at_punct("-") || at_punct("+")) {
            std::string op = cur().text;
            advance();
            ExprP operand = parse_cast_expr();
            ExprP e = mk(Expr::Unary, loc);
            e->text = op;
            e->type = operand->type;
            e->kids.push_back(std::move(operand));
            return e;
        }
        if (at("sizeof")) {
            advance();
            if (at_punct("(")) {
                size_t save = pos_;
                advance();
                if (at_type_name_start()) {
                    parse_type_name();
                    expect(")");
                    ExprP e = mk(Expr::SizeofType, loc);
                    e->type = Type::make(Type::Int);
                    return e;
                }
                pos_ = save;
            }
            ExprP operand = parse_unary();
            ExprP e = mk(Expr::SizeofExpr, loc);
            e->type = Type::make(Type::Int);
            e->kids.push_back(std::move(operand));
            return e;
        }
        return parse_postfix();
    }

    ExprP parse_postfix() {
        ExprP e = parse_primary();
        while (true) {
            if (at_punct("(")) {
                e = parse_call(std::move(e));
            } else if (at_punct("[")) {
                SourceLoc loc = cur().loc;
                advance();
                ExprP idx = parse_expression();
                expect("]");
                if (is_ptr(e->type))
                    flag(ConstructFlag::PointerArith, loc, ident_of(*e), "pointer-index");
                ExprP n = mk(Expr::Index, loc);
                n->type = (e->type && e->type->elem) ? e->type->elem : Type::make(Type::Unknown);
                n->kids.push_back(std::move(e));
                n->kids.push_back(std::move(idx));
                e = std::move(n);
            } else if (at_punct(".") || at_punct("->")) {
                SourceLoc loc = cur().loc;
                std::string op = cur().text;
                advance();
                if (cur().kind != CTok::Ident)
                    throw FrontendError(cur().loc, "expected a member name");
                std::string field = cur().text;
                advance();
                ExprP n = mk(Expr::Member, loc);
                n->text = field;
                n->type = Type::make(Type::Unknown);
                n->kids.push_back(std::move(e));
                e = std::move(n);
            } else if (at_punct("++") || at_punct("--")) {
                SourceLoc loc = cur().loc;
                std::string op = cur().text;
                if (is_ptr(e->type))
                    flag(ConstructFlag::PointerArith, loc, ident_of(*e), op);
                advance();
                ExprP n = mk(Expr::PostOp, loc);
                n->text = op;
                n->type = e->type;
                n->kids.push_back(std::move(e));
                e = std::move(n);
            } else {
                break;
            }
        }
        // a function name that escaped call position is a function-pointer use
        if (e->k == Expr::Ident && e->idkind == Expr::IdFunc)
            flag(ConstructFlag::FunctionPointer, e->loc, e->text, "function-value escape");
        return e;
    }

    ExprP parse_call(ExprP callee) {
        SourceLoc loc = cur().loc;
        expect("(");
        std::vector<ExprP> args;
        if (!at_punct(")")) {
            while (true) {
                args.push_back(parse_assign_expr());
                if (at_punct(",")) { advance(); continue; }
                break;
            }
        }
        expect(")");

        ExprP e = mk(Expr::Call, loc);
        e->call_arity = static_cast<int>(args.size());
        bool direct = callee->k == Expr::Ident &&
                      (callee->idkind == Expr::IdFunc || callee->idkind == Expr::IdUnknown);
        if (direct) {
            e->text = callee->text;
            if (e->text == "setjmp" || e->text == "longjmp")
                unsupported(e->text);
            e->type = (callee->type && callee->type->ret) ? callee->type->ret
                                                          : Type::make(Type::Unknown);
        } else {
            e->via_pointer_call = true;
            e->type = Type::make(Type::Unknown);
            flag(ConstructFlag::FunctionPointer, loc, ident_of(*callee), "indirect call");
        }
        // keep direct-callee idents out of the escape check
        if (callee->k == Expr::Ident) callee->idkind = Expr::IdNone;
        e->kids.push_back(std::move(callee));
        for (auto& a : args) e->kids.push_back(std::move(a));

        if (!current_fn_.empty() && in_module(loc)) {
            CallSite cs;
            cs.caller = current_fn_;
            cs.callee = e->via_pointer_call ? "" : e->text;
            cs.args_arity = e->call_arity;
            cs.loc = loc;
            cs.via_pointer = e->via_pointer_call;
            m_.calls.push_back(std::move(cs));
        }
        return e;
    }

    ExprP parse_primary() {
        SourceLoc loc = cur().loc;
        if (at_punct("(")) {
            advance();
            ExprP e = parse_expression();
            expect(")");
            return e;
        }
        if (cur().kind == CTok::Number) {
            bool is_float = cur().text.find('.') != std::string::npos ||
                            ((cur().text.find('e') != std::string::npos ||
                              cur().text.find('E') != std::string::npos) &&
                             cur().text.compare(0, 2, "0x") != 0 &&
                             cur().text.compare(0, 2, "0X") != 0);
            ExprP e = mk(is_float ? Expr::FloatLit : Expr::IntLit, loc);
            e->text = cur().text;
            e->type = Type::make(is_float ? Type::Float : Type::Int);
            advance();
            return e;
        }
        if (cur().kind == CTok::String) {
            ExprP e = mk(Expr::StrLit, loc);
            e->text = cur().text;
            e->type = Type::ptr_to(Type::make(Type::Int));
            advance();
            while (cur().kind == CTok::String) advance();  // adjacent literals
            return e;
        }
        if (cur().kind == CTok::CharLit) {
            ExprP e = mk(Expr::CharLitK, loc);
            e->text = cur().text;
            e->type = Type::make(Type::Int);
            advance();
            return e;
        }
        if (cur().kind == CTok::Ident) {
            std::string name = cur().text;
            advance();
            if (cfg_.null_macros.count(name)) {
                ExprP e = mk(Expr::NullConst, loc);
                e->text = name;
                e->type = Type::ptr_to(Type::make(Type::Void));
                return e;
            }
            ExprP e = mk(Expr::Ident, loc);
            e->text = name;
            Sym* s = lookup(name);
            if (!s) {
                e->idkind = Expr::IdUnknown;
                e->type = Type::make(Type::Unknown);
            } else if (s->k == Sym::Function) {
                e->idkind = Expr::IdFunc;
                e->type = s->type;
            } else if (s->k == Sym::EnumConst) {
                e->idkind = Expr::IdEnum;
                e->type = s->type;
            } else if (s->k == Sym::TypedefName) {
                throw FrontendError(loc, "type name '" + name + "' used as an expression");
            } else {
                e->idkind = s->module_global ? Expr::IdGlobal : Expr::IdLocal;
                e->type = s->type;
            }
            return e;
        }
        throw FrontendError(loc, "unexpected token '" + cur().text + "' in expression");
    }

    static std::string ident_of(const Expr& e) {
        if (e.k == Expr::Ident) return e.text;
        if (!e.kids.empty()) return ident_of(*e.kids[0]);
        return {};
    }

    // ------------------------------------------------------------- lowering

    // Emit the evaluation events of `e` into the builder, left to right, with
    // short-circuit operators lowered to branches.
    void lower(const Expr& e) {
        CfgBuilder& b = *builder_;
        switch (e.k) {
        case Expr::IntLit:
        case Expr::FloatLit:
        case Expr::StrLit:
        case Expr::CharLitK:
        case Expr::NullConst:
        case Expr::SizeofType:
        case Expr::SizeofExpr:  // unevaluated operand
            return;
        case Expr::Ident:
            if (e.idkind == Expr::IdGlobal)
                b.emit({Event::Read, e.text, e.loc});
            return;
        case Expr::Comma:
            lower(*e.kids[0]);
            lower(*e.kids[1]);
            return;
        case Expr::CastOp:
        case Expr::Member:
            lower(*e.kids[0]);
            return;
        case Expr::Index:
            lower(*e.kids[0]);
            lower(*e.kids[1]);
            return;
        case Expr::Unary:
            if (e.text == "&") {
                const Expr& operand = *e.kids[0];
                if (operand.k == Expr::Ident && operand.idkind == Expr::IdGlobal) {
                    b.emit({Event::AddrTaken, operand.text, e.loc});
                    return;
                }
                lower(operand);
                return;
            }
            if (e.text == "++" || e.text == "--") {
                lower_incdec(*e.kids[0], e.loc);
                return;
            }
            lower(*e.kids[0]);
            return;
        case Expr::PostOp:
            lower_incdec(*e.kids[0], e.loc);
            return;
        case Expr::Call: {
            for (size_t i = 1; i < e.kids.size(); ++i) lower(*e.kids[i]);
            if (e.via_pointer_call) lower(*e.kids[0]);
            Event ev{Event::Call, e.text, e.loc};
            ev.arity = e.call_arity;
            ev.via_pointer = e.via_pointer_call;
            b.emit(std::move(ev));
            return;
        }
        case Expr::Binary:
            if (e.text == "&&" || e.text == "||") {
                lower(*e.kids[0]);
                int head = b.cur();
                int rhs_b = b.new_block();
                b.edge(head, rhs_b);
                b.set_cur(rhs_b);
                lower(*e.kids[1]);
                int rhs_end = b.cur();
                int join = b.new_block();
                b.edge(head, join);  // short-circuit skip
                b.edge(rhs_end, join);
                b.set_cur(join);
                return;
            }
            lower(*e.kids[0]);
            lower(*e.kids[1]);
            return;
        case Expr::CondOp: {
            lower(*e.kids[0]);
            int head = b.cur();
            int tb = b.new_block();
            b.edge(head, tb);
            b.set_cur(tb);
            lower(*e.kids[1]);
            int t_end = b.cur();
            int fb = b.new_block();
            b.edge(head, fb);
            b.set_cur(fb);
            lower(*e.kids[2]);
            int f_end = b.cur();
            int join = b.new_block();
            b.edge(t_end, join);
            b.edge(f_end, join);
            b.set_cur(join);
            return;
        }
        case Expr::Assign: {
            const Expr& lhs = *e.kids[0];
            const Expr& rhs = *e.kids[1];
            if (e.text != "=") {
                // compound assignment reads the target first
                lower(lhs);
            } else {
                lower_store_prelude(lhs);
            }
            lower(rhs);
            lower_store(lhs);
            return;
        }
        }
    }

    void lower_incdec(const Expr& target, const SourceLoc& loc) {
        lower(target);  // read
        (void)loc;
        lower_store(target);
    }

    // Index/member stores still evaluate their index subexpressions.
    void lower_store_prelude(const Expr& lhs) {
        if (lhs.k == Expr::Index) {
            lower_store_prelude(*lhs.kids[0]);
            lower(*lhs.kids[1]);
        } else if (lhs.k == Expr::Member) {
            lower_store_prelude(*lhs.kids[0]);
        } else if (lhs.k == Expr::Unary && lhs.text == "*") {
            lower(*lhs.kids[0]);  // the pointer itself is read
        }
    }

    void lower_store(const Expr& lhs) {
        CfgBuilder& b = *builder_;
        if (lhs.k == Expr::Ident) {
            if (lhs.idkind == Expr::IdGlobal)
                b.emit({Event::WriteWhole, lhs.text, lhs.loc});
            return;
        }
        if (lhs.k == Expr::Index || lhs.k == Expr::Member) {
            const Expr* root = &lhs;
            while (root->k == Expr::Index || root->k == Expr::Member) root = root->kids[0].get();
            if (root->k == Expr::Ident && root->idkind == Expr::IdGlobal)
                b.emit({Event::WritePart, root->text, lhs.loc});
            return;
        }
        // stores through pointers or casts: nothing trackable
    }

    // ------------------------------------------------------------- recursion

    void check_no_recursion() {
        // direct or mutual recursion among functions defined in this unit
        std::map<std::string, std::set<std::string>> graph;
        for (const auto& cs : m_.calls)
            if (m_.defs.count(cs.callee)) graph[cs.caller].insert(cs.callee);
        enum { White, Gray, Black };
        std::map<std::string, int> color;
        std::function<void(const std::string&)> visit = [&](const std::string& fn) {
            color[fn] = Gray;
            for (const auto& next : graph[fn]) {
                if (color[next] == Gray)
                    throw FrontendError(
                        m_.definition_of(fn) ? m_.definition_of(fn)->loc : SourceLoc{},
                        "recursion involving '" + fn + "' and '" + next + "'");
                if (color[next] == White) visit(next);
            }
            color[fn] = Black;
        };
        for (const auto& [fn, _] : graph)
            if (color[fn] == White) visit(fn);
    }

    CModule& m_;
    std::vector<CTok> toks_;
    const PreprocConfig& cfg_;
    std::string h_canon_, c_canon_;
    std::map<std::string, DeclaredIn> class_cache_;
    size_t pos_ = 0;
    CTok eof_;
    std::vector<std::map<std::string, Sym>> scopes_;
    std::vector<LoopCtx> loops_;
    CfgBuilder* builder_ = nullptr;
    std::string current_fn_;
};

} // namespace

void check_cfg_wellformed(const Cfg& cfg) {
    int n = static_cast<int>(cfg.blocks.size());
    if (cfg.entry < 0 || cfg.entry >= n || cfg.exit < 0 || cfg.exit >= n)
        throw std::logic_error("cfg: bad entry/exit index");
    if (!cfg.blocks[cfg.exit].succs.empty())
        throw std::logic_error("cfg: exit block has successors");
    std::vector<bool> seen(n, false);
    std::vector<int> stack{cfg.entry};
    seen[cfg.entry] = true;
    while (!stack.empty()) {
        int b = stack.back();
        stack.pop_back();
        for (int s : cfg.blocks[b].succs) {
            if (s < 0 || s >= n) throw std::logic_error("cfg: dangling edge");
            if (!seen[s]) {
                seen[s] = true;
                stack.push_back(s);
            }
        }
    }
    for (int i = 0; i < n; ++i)
        if (!seen[i] && i != cfg.exit) throw std::logic_error("cfg: unreachable block");
}

CModule parse_module(const std::string& h_path, const std::string& c_path,
                     const PreprocConfig& cfg) {
    CModule m;
    std::error_code ec;
    std::string h_canon = fs::weakly_canonical(h_path, ec).string();
    std::string c_canon = fs::weakly_canonical(c_path, ec).string();
    m.h_path = h_path;
    m.c_path = c_path;
    m.name = fs::path(c_path).stem().string();

    std::map<std::string, Sym> seed;
    auto run = [&](const std::string& entry) {
        PreprocResult pp = preprocess(entry, cfg);
        for (auto& inc : pp.includes) {
            bool dup = false;
            for (const auto& prev : m.includes)
                if (prev.loc == inc.loc && prev.directive_text == inc.directive_text) dup = true;
            if (!dup) m.includes.push_back(std::move(inc));
        }
        ModuleParser parser(m, std::move(pp.tokens), cfg, h_canon, c_canon,
                            std::move(seed));
        parser.parse_translation_unit();
        seed = parser.take_file_scope();
    };
    run(h_path);
    run(c_path);
    return m;
}

} // namespace modcheck::cfront
