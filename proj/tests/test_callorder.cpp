#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "modcheck/callorder.hpp"
#include "test_util.hpp"

using namespace modcheck;
using namespace modcheck::callorder;
using testutil::TempModule;

namespace {

isc::ISContract contract(const std::string& text) { return isc::parse_contract(text); }

cfront::CModule load_tmon(char which) {
    cfront::PreprocConfig cfg;
    cfg.include_dirs.push_back(testutil::fixture("tmon"));
    std::string base = std::string("tmon/tmon_") + which;
    return cfront::parse_module(testutil::fixture(base + ".h"), testutil::fixture(base + ".c"),
                                cfg);
}

isc::ISContract tmon_contract() {
    return contract(testutil::read_file(testutil::fixture("tmon/tmon.is")));
}

} // namespace

TEST_CASE("call sequence summaries: must_call and must_before") {
    TempModule tm("co1");
    auto m = tm.make("void e(void);\n",
                     "void x(void); void y(void); void z(void);\n"
                     "static int g;\n"
                     "void e(void) { x(); if (g) { y(); } z(); }\n");
    auto s = summarize_call_sequences(m);
    const auto& e = s.at("e");
    CHECK(e.must_call == std::set<std::string>{"x", "z"});
    CHECK(e.may_call == std::set<std::string>{"x", "y", "z"});
    for (const auto& site : e.sites) {
        if (site.callee == "z") {
            CHECK(site.must_before.count("x") == 1);
            CHECK(site.must_before.count("y") == 0);  // conditional
        }
        if (site.callee == "y") CHECK(site.must_before == std::set<std::string>{"x"});
    }
}

TEST_CASE("local callees are spliced into the caller's sequence") {
    TempModule tm("co2");
    auto m = tm.make("void e(void);\n",
                     "void x(void); void y(void);\n"
                     "static void inner(void) { y(); }\n"
                     "void e(void) { x(); inner(); }\n");
    auto s = summarize_call_sequences(m);
    const auto& e = s.at("e");
    CHECK(e.must_call.count("y") == 1);
    bool saw = false;
    for (const auto& site : e.sites)
        if (site.callee == "y") {
            saw = true;
            CHECK(site.must_before.count("x") == 1);
        }
    CHECK(saw);
}

TEST_CASE("static check on the reference module pair") {
    auto c = tmon_contract();
    CHECK(check_call_order(load_tmon('a'), c).empty());
    auto diags = check_call_order(load_tmon('b'), c);
    REQUIRE(!diags.empty());
    CHECK(diags[0].rule_id == "CFR2");
    bool warn = std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) {
        return d.subject == "tmon_warn_write";
    });
    CHECK(warn);
}

TEST_CASE("oracle agrees on the reference module pair") {
    auto c = tmon_contract();
    OracleBounds b;
    b.max_schedule_len = 3;
    b.max_unroll = 2;
    auto ra = enumerate_oracle(load_tmon('a'), c, b);
    CHECK_FALSE(ra.violation_found);
    CHECK_FALSE(ra.bound_exceeded);
    auto rb = enumerate_oracle(load_tmon('b'), c, b);
    CHECK(rb.violation_found);
    CHECK(rb.violated_before == "tmon_warn_create");
    CHECK(rb.violated_after == "tmon_warn_write");
}

TEST_CASE("conditional init before use fails, and the oracle confirms") {
    TempModule tm("co3");
    auto m = tm.make("void e(void);\n",
                     "void init(void); void use(void);\n"
                     "static int c;\n"
                     "void e(void) { if (c) { init(); } use(); }\n");
    auto ctr = contract(R"(
module m {
  entry_points: { void e(void) }
  external_calls: { g: { void init(void), void use(void) } }
  external_call_order: { init < use }
})");
    auto diags = check_call_order(m, ctr);
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].subject == "use");
    auto r = enumerate_oracle(m, ctr, {});
    CHECK(r.violation_found);
}

TEST_CASE("guarantee via an ordered prior entry") {
    TempModule tm("co4");
    auto m = tm.make("void a(void); void b(void);\n",
                     "void init(void); void use(void);\n"
                     "void a(void) { init(); }\n"
                     "void b(void) { use(); }\n");
    auto ordered = contract(R"(
module m {
  entry_points: { void a(void), void b(void) }
  entry_order: { a < b }
  external_calls: { g: { void init(void), void use(void) } }
  external_call_order: { init < use }
})");
    CHECK(check_call_order(m, ordered).empty());
    CHECK_FALSE(enumerate_oracle(m, ordered, {}).violation_found);

    auto unordered = contract(R"(
module m {
  entry_points: { void a(void), void b(void) }
  external_calls: { g: { void init(void), void use(void) } }
  external_call_order: { init < use }
})");
    CHECK(!check_call_order(m, unordered).empty());
    CHECK(enumerate_oracle(m, unordered, {}).violation_found);
}

TEST_CASE("constraints over uncalled functions pass vacuously") {
    TempModule tm("co5");
    auto m = tm.make("void e(void);\n", "void e(void) { }\n");
    auto ctr = contract(R"(
module m {
  entry_points: { void e(void) }
  external_calls: { g: { void init(void), void use(void) } }
  external_call_order: { init < use }
})");
    CHECK(check_call_order(m, ctr).empty());
    CHECK_FALSE(enumerate_oracle(m, ctr, {}).violation_found);
}

TEST_CASE("removing a constraint never adds diagnostics") {
    auto m = load_tmon('b');
    auto c = tmon_contract();
    auto full = check_call_order(m, c);
    isc::ISContract reduced = c;
    reduced.external_order.pop_back();
    auto fewer = check_call_order(m, reduced);
    for (const auto& d : fewer)
        CHECK(std::find(full.begin(), full.end(), d) != full.end());
}

TEST_CASE("admissible schedules respect first-occurrence order") {
    auto c = contract(R"(
module m {
  entry_points: { void a(void), void b(void) }
  entry_order: { a < b }
  external_calls: { }
})");
    auto scheds = admissible_schedules(c, 3);
    CHECK(!scheds.empty());
    for (const auto& s : scheds) {
        auto fa = std::find(s.begin(), s.end(), "a");
        auto fb = std::find(s.begin(), s.end(), "b");
        REQUIRE(fa != s.end());
        REQUIRE(fb != s.end());
        CHECK(fa < fb);
        CHECK(s.size() >= 2);
        CHECK(s.size() <= 3);
    }
    // repeats are allowed after the first activations
    bool with_repeat = std::any_of(scheds.begin(), scheds.end(),
                                   [](const auto& s) { return s.size() == 3; });
    CHECK(with_repeat);
}

TEST_CASE("event trace enumeration honors the unroll bound") {
    TempModule tm("co6");
    auto m = tm.make("void e(void);\n",
                     "void x(void);\n"
                     "static int g;\n"
                     "void e(void) { while (g) { x(); } }\n");
    bool exceeded = false;
    auto traces = enumerate_event_traces(m, "e", 2, 1000, &exceeded);
    CHECK_FALSE(exceeded);
    // 0, 1, or 2 loop iterations
    std::set<size_t> call_counts;
    for (const auto& t : traces) {
        size_t n = 0;
        for (const auto& ev : t)
            if (ev.kind == cfront::Event::Call) ++n;
        call_counts.insert(n);
    }
    CHECK(call_counts == std::set<size_t>{0, 1, 2});
}
