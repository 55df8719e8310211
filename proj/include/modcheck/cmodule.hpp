#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "modcheck/source_loc.hpp"

// Semantic model of one module: the `.h`/`.c` pair plus whatever it includes.

namespace modcheck::cfront {

struct FrontendError : std::runtime_error {
    SourceLoc loc;
    bool unsupported_construct;
    FrontendError(SourceLoc l, const std::string& msg, bool unsupported = false)
        : std::runtime_error(to_string(l) + ": " + msg),
          loc(std::move(l)),
          unsupported_construct(unsupported) {}
};

enum class DeclaredIn { Header, Source, External };

struct IncludeRecord {
    std::string directive_text;  // raw token after #include, quotes/brackets kept
    std::string resolved_path;   // empty when unresolved
    bool is_header_suffix = false;
    bool angled = false;
    bool active = true;  // false when inside a false conditional branch
    SourceLoc loc;
};

struct GlobalVar {
    std::string name;
    std::string type_text;
    bool is_static = false;
    bool has_initializer = false;
    DeclaredIn declared_in = DeclaredIn::Source;
    SourceLoc loc;
};

struct FunSig {
    std::string name;
    std::string return_type;          // normalized token text
    std::vector<std::string> params;  // normalized types, names stripped; empty == (void)
    bool variadic = false;

    bool operator==(const FunSig&) const = default;
};

struct FunDeclSite {
    FunSig signature;
    bool is_static = false;
    bool is_extern_kw = false;
    DeclaredIn declared_in = DeclaredIn::Source;
    bool is_definition = false;
    SourceLoc loc;
};

struct CallSite {
    std::string caller;
    std::string callee;  // empty when via_pointer through a non-identifier
    int args_arity = 0;
    SourceLoc loc;
    bool via_pointer = false;
};

// Surface-level constructs the data/control-flow rules care about.
struct ConstructFlag {
    enum Kind {
        FunctionPointer,  // declaration, address escape, or indirect call
        PointerArith,     // +/-/++/-- or indexing on pointer-typed operand
        PointerCast,      // explicit cast from or to pointer type
        PointerLiteral,   // integer constant in pointer context
        ExternKeyword,
    };
    Kind kind;
    SourceLoc loc;
    std::string subject;  // involved identifier when known
    std::string detail;   // e.g. "function-declaration" for extern uses
};

// Function definition or initialized variable found in the `.h` file.
struct HeaderDef {
    enum Kind { FunctionDefinition, VariableInitialization } kind;
    std::string name;
    SourceLoc loc;
};

// Declaration picked up from an included external header; candidate callee
// for the call-permission rule.
struct ExternalDecl {
    FunSig signature;
    std::string header_basename;
    SourceLoc loc;
};

// Abstract per-statement effects used by the flow analyses. Whole-object
// granularity: element/field writes are partial writes.
struct Event {
    enum Kind { Read, WriteWhole, WritePart, Call, AddrTaken } kind;
    std::string name;  // variable or callee name
    SourceLoc loc;
    int arity = 0;
    bool via_pointer = false;
};

struct BasicBlock {
    std::vector<Event> events;
    std::vector<int> succs;
};

struct Cfg {
    std::vector<BasicBlock> blocks;
    int entry = 0;
    int exit = 0;
    // Loop back edges, recorded by the builder during lowering.
    std::set<std::pair<int, int>> back_edges;

    bool is_back_edge(int from, int to) const { return back_edges.count({from, to}) != 0; }
};

struct CModule {
    std::string name;  // stem of the .c file
    std::string h_path;
    std::string c_path;

    std::vector<IncludeRecord> includes;
    std::vector<std::pair<std::string, std::string>> typedefs;  // name -> underlying text
    std::vector<GlobalVar> globals;                             // module file scope only
    std::vector<FunDeclSite> decls;                             // in module files only
    std::map<std::string, Cfg> defs;
    std::vector<CallSite> calls;
    std::vector<ConstructFlag> construct_flags;
    std::vector<HeaderDef> header_defs;
    std::multimap<std::string, ExternalDecl> ext_decls;
    std::set<std::string> address_taken_globals;

    // Raw base-type occurrences for the typedef-usage rule.
    struct RawTypeUse {
        std::string raw_base;  // e.g. "int", "unsigned short"
        std::string context;   // global | local | param | return | field
        std::string owner_fn;  // for param/return uses
        SourceLoc loc;
    };
    std::vector<RawTypeUse> raw_type_uses;

    bool defines(const std::string& fn) const { return defs.count(fn) != 0; }

    const GlobalVar* global(const std::string& n) const {
        for (const auto& g : globals)
            if (g.name == n) return &g;
        return nullptr;
    }

    const FunDeclSite* definition_of(const std::string& fn) const {
        for (const auto& d : decls)
            if (d.is_definition && d.signature.name == fn) return &d;
        return nullptr;
    }

    bool in_module_file(const SourceLoc& loc) const {
        return loc.file == h_path || loc.file == c_path;
    }
};

} // namespace modcheck::cfront
