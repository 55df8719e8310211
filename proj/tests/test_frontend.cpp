#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "modcheck/frontend.hpp"
#include "test_util.hpp"

using namespace modcheck::cfront;
using testutil::TempModule;

namespace {

std::vector<Event> linear_events(const Cfg& cfg) {
    // events of a straight-line function (entry block chain)
    std::vector<Event> out;
    int b = cfg.entry;
    while (true) {
        for (const auto& e : cfg.blocks[b].events) out.push_back(e);
        if (cfg.blocks[b].succs.size() != 1) break;
        b = cfg.blocks[b].succs[0];
    }
    return out;
}

bool has_flag(const CModule& m, ConstructFlag::Kind k) {
    return std::any_of(m.construct_flags.begin(), m.construct_flags.end(),
                       [&](const ConstructFlag& f) { return f.kind == k; });
}

} // namespace

TEST_CASE("tmon_a parses into the expected model") {
    PreprocConfig cfg;
    cfg.include_dirs.push_back(testutil::fixture("tmon"));
    CModule m = parse_module(testutil::fixture("tmon/tmon_a.h"),
                             testutil::fixture("tmon/tmon_a.c"), cfg);
    CHECK(m.name == "tmon_a");
    REQUIRE(m.globals.size() == 1);
    CHECK(m.globals[0].name == "timer");
    CHECK(m.globals[0].is_static);
    CHECK_FALSE(m.globals[0].has_initializer);
    CHECK(m.defs.size() == 3);
    CHECK(m.defines("tmon_init"));
    CHECK(m.defines("tmon_step"));
    CHECK(m.defines("update_sat"));
    CHECK(m.header_defs.empty());
    CHECK(m.construct_flags.empty());
    // external declarations carry their header of origin
    auto [lo, hi] = m.ext_decls.equal_range("tmon_sens_read");
    REQUIRE(lo != hi);
    CHECK(lo->second.header_basename == "sensors.h");
    // calls are attributed to their callers
    int step_calls = 0;
    for (const auto& cs : m.calls)
        if (cs.caller == "tmon_step") ++step_calls;
    CHECK(step_calls == 4);  // sens_read, update_sat, 2x warn_write
    for (const auto& [fn, cfgr] : m.defs) check_cfg_wellformed(cfgr);
    // update_sat's `timer` parameter shadows the global: no events on it
    bool found = false;
    for (const auto& b : m.defs.at("update_sat").blocks)
        for (const auto& e : b.events)
            if (e.name == "timer") found = true;
    CHECK_FALSE(found);
}

TEST_CASE("event ordering: rhs before store, compound assign reads first") {
    TempModule tm("fe1");
    CModule m = tm.make("void e(void);\n",
                        "static int g;\nstatic int h;\n"
                        "void e(void) { g = h + 1; g = g + 1; g += 2; }\n");
    auto evs = linear_events(m.defs.at("e"));
    REQUIRE(evs.size() == 6);
    CHECK(evs[0].kind == Event::Read);
    CHECK(evs[0].name == "h");
    CHECK(evs[1].kind == Event::WriteWhole);
    CHECK(evs[1].name == "g");
    CHECK(evs[2].kind == Event::Read);   // g = g + 1 reads g first
    CHECK(evs[2].name == "g");
    CHECK(evs[3].kind == Event::WriteWhole);
    CHECK(evs[4].kind == Event::Read);   // g += 2
    CHECK(evs[5].kind == Event::WriteWhole);
}

TEST_CASE("partial writes and address taking") {
    TempModule tm("fe2");
    CModule m = tm.make("void e(int*);\n",
                        "static int a[4];\nstatic int g;\n"
                        "void use(int *p);\n"
                        "void e(void) { a[1] = 2; use(&g); }\n");
    auto evs = linear_events(m.defs.at("e"));
    bool part = false, addr = false;
    for (const auto& ev : evs) {
        if (ev.kind == Event::WritePart && ev.name == "a") part = true;
        if (ev.kind == Event::AddrTaken && ev.name == "g") addr = true;
    }
    CHECK(part);
    CHECK(addr);
    CHECK(m.address_taken_globals.count("g") == 1);
    CHECK(m.address_taken_globals.count("a") == 0);
}

TEST_CASE("loops carry explicit back edges") {
    TempModule tm("fe3");
    CModule m = tm.make("void e(void);\n",
                        "static int g;\n"
                        "void e(void) {\n"
                        "  while (g) { g = g - 1; }\n"
                        "  for (g = 0; g < 3; g = g + 1) { }\n"
                        "  do { g = 1; } while (g);\n"
                        "}\n");
    const Cfg& c = m.defs.at("e");
    check_cfg_wellformed(c);
    CHECK(c.back_edges.size() == 3);
}

TEST_CASE("break and continue target the right blocks") {
    TempModule tm("fe4");
    CModule m = tm.make("void e(void);\n",
                        "static int g;\n"
                        "void e(void) {\n"
                        "  while (g) { if (g) { break; } g = 1; }\n"
                        "  while (g) { if (g) { continue; } g = 2; }\n"
                        "}\n");
    check_cfg_wellformed(m.defs.at("e"));
}

TEST_CASE("switch with fallthrough and default") {
    TempModule tm("fe5");
    CModule m = tm.make("void e(void);\n",
                        "static int g;\n"
                        "void e(void) {\n"
                        "  switch (g) {\n"
                        "  case 0: g = 1; break;\n"
                        "  case 1:\n"
                        "  case 2: g = 2; /* falls through */\n"
                        "  default: g = 3;\n"
                        "  }\n"
                        "}\n");
    check_cfg_wellformed(m.defs.at("e"));
}

TEST_CASE("short-circuit operators fork the flow") {
    TempModule tm("fe6");
    CModule m = tm.make("void e(void);\n",
                        "static int g; static int h;\n"
                        "void e(void) { if (g && h) { g = 1; } h = g ? 1 : 2; }\n");
    const Cfg& c = m.defs.at("e");
    check_cfg_wellformed(c);
    CHECK(c.blocks.size() > 4);
}

TEST_CASE("returns connect to the exit block") {
    TempModule tm("fe7");
    CModule m = tm.make("int e(void);\n",
                        "static int g;\n"
                        "int e(void) { if (g) { return 1; } g = 1; return 0; }\n");
    const Cfg& c = m.defs.at("e");
    check_cfg_wellformed(c);
    CHECK(c.blocks[c.exit].succs.empty());
}

TEST_CASE("function pointer constructs are flagged") {
    TempModule tm("fe8");
    CModule decl = tm.make("void e(void);\n",
                           "static int f(void) { return 0; }\n"
                           "void e(void) { int (*fp)(void) = f; fp(); }\n");
    CHECK(has_flag(decl, ConstructFlag::FunctionPointer));

    TempModule tm2("fe8b");
    CModule escape = tm2.make("void e(void);\n",
                              "void reg(int cb);\n"
                              "static int f(void) { return 0; }\n"
                              "void e(void) { reg(f); }\n");
    CHECK(has_flag(escape, ConstructFlag::FunctionPointer));

    TempModule tm3("fe8c");
    CModule clean = tm3.make("void e(void);\n",
                             "static int f(void) { return 0; }\n"
                             "void e(void) { f(); }\n");
    CHECK_FALSE(has_flag(clean, ConstructFlag::FunctionPointer));
}

TEST_CASE("pointer discipline constructs are flagged") {
    TempModule tm("fe9");
    CModule m = tm.make("void e(int *p, char *buf);\n",
                        "void e(int *p, char *buf) {\n"
                        "  int x;\n"
                        "  p = p + 1;\n"
                        "  x = (int)(long)buf;\n"
                        "  p = (int*)buf;\n"
                        "}\n");
    CHECK(has_flag(m, ConstructFlag::PointerArith));
    CHECK(has_flag(m, ConstructFlag::PointerCast));

    TempModule tm2("fe9b");
    CModule lit = tm2.make("void e(void);\n",
                           "void e(void) { int *p = 0; p = (int*)0x2000; }\n");
    CHECK(has_flag(lit, ConstructFlag::PointerLiteral));

    // plain array indexing is not pointer arithmetic
    TempModule tm3("fe9c");
    CModule arr = tm3.make("void e(void);\n",
                           "static int a[4];\n"
                           "void e(void) { int i; i = 1; a[i] = a[0]; }\n");
    CHECK_FALSE(has_flag(arr, ConstructFlag::PointerArith));
}

TEST_CASE("null macros are exempt pointer constants") {
    TempModule tm("fe10");
    PreprocConfig cfg;
    cfg.null_macros = {"NULL"};
    CModule m = tm.make("void e(void);\n", "void e(void) { int *p = NULL; }\n", cfg);
    CHECK_FALSE(has_flag(m, ConstructFlag::PointerLiteral));
}

TEST_CASE("extern keyword is flagged with context") {
    TempModule tm("fe11");
    CModule m = tm.make("extern void e(void);\n",
                        "extern int other_var;\n"
                        "void e(void) { other_var = 1; }\n");
    int fn = 0, var = 0;
    for (const auto& f : m.construct_flags) {
        if (f.kind != ConstructFlag::ExternKeyword) continue;
        if (f.detail == "function-declaration") ++fn;
        else ++var;
    }
    CHECK(fn == 1);
    CHECK(var == 1);
    // extern variable declarations are not module globals
    CHECK(m.global("other_var") == nullptr);
}

TEST_CASE("header definitions are recorded") {
    TempModule tm("fe12");
    CModule m = tm.make("int f(void) { return 0; }\nint x = 3;\nvoid e(void);\n",
                        "void e(void) { }\n");
    REQUIRE(m.header_defs.size() == 2);
    CHECK(m.header_defs[0].kind == HeaderDef::FunctionDefinition);
    CHECK(m.header_defs[1].kind == HeaderDef::VariableInitialization);
}

TEST_CASE("typedefs are tracked and their raw types not reported") {
    TempModule tm("fe13");
    CModule m = tm.make("typedef unsigned short tU16;\nvoid e(tU16 v);\n",
                        "static int counter;\n"
                        "void e(tU16 v) { counter = v; }\n");
    REQUIRE(m.typedefs.size() == 1);
    CHECK(m.typedefs[0].first == "tU16");
    // raw uses: only `int counter` (typedef body and tU16 params excluded)
    REQUIRE(m.raw_type_uses.size() == 1);
    CHECK(m.raw_type_uses[0].raw_base == "int");
    CHECK(m.raw_type_uses[0].context == "global");
}

TEST_CASE("unsupported constructs raise frontend errors") {
    auto bad = [](const char* body) {
        TempModule tm("fe14");
        CHECK_THROWS_AS(tm.make("void e(void);\n", body), FrontendError);
    };
    bad("void e(void) { goto done; done: ; }\n");
    bad("void e(int n) { int a[n]; }\n");
    bad("void v(int n, ...) { }\nvoid e(void) { }\n");
    // recursion, direct and mutual
    bad("void e(void) { e(); }\n");
    bad("static void b(void);\nstatic void a(void) { b(); }\n"
        "static void b(void) { a(); }\nvoid e(void) { a(); }\n");
}

TEST_CASE("external header definitions are skimmed, not analyzed") {
    TempModule tm("fe15");
    tm.write("lib.h", "static int lib_helper(int v) { return v + 1; }\nvoid lib_fn(void);\n");
    CModule m = tm.make("void e(void);\n",
                        "#include \"lib.h\"\nvoid e(void) { lib_fn(); }\n");
    CHECK_FALSE(m.defines("lib_helper"));
    CHECK(m.ext_decls.count("lib_fn") == 1);
    // nothing in lib.h is flagged against the module
    CHECK(m.construct_flags.empty());
}

TEST_CASE("array and struct declarations parse") {
    TempModule tm("fe16");
    CModule m = tm.make("void e(void);\n",
                        "struct pair { int a; int b; };\n"
                        "static struct pair ps[3];\n"
                        "enum mode { OFF, ON = 2 };\n"
                        "static int g;\n"
                        "void e(void) { ps[0].a = 1; g = ON; }\n");
    CHECK(m.global("ps") != nullptr);
    auto evs = linear_events(m.defs.at("e"));
    bool part = false;
    for (const auto& ev : evs)
        if (ev.kind == Event::WritePart && ev.name == "ps") part = true;
    CHECK(part);
}
