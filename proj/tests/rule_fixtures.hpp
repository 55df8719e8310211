#pragma once

// Minimal violating/conforming module pair for every rule, shared by the
// rule unit tests and the acceptance suite.

#include <optional>
#include <string>
#include <vector>

#include "modcheck/rules.hpp"
#include "test_util.hpp"

namespace rulefix {

struct RulePair {
    std::string rule_id;
    std::string task_id;  // task that owns the rule
    std::string violating_h, violating_c;
    std::string conforming_h, conforming_c;
    std::string contract_text;  // empty when the task runs without one
    std::vector<std::pair<std::string, std::string>> extra_files;
};

inline const std::string kBaseContract = R"(
module m {
  entry_points: { void e(void) }
  external_calls: { g: { void x(void), void y(void) } }
})";

inline const std::string kOrderContract = R"(
module m {
  entry_points: { void e(void) }
  external_calls: { g: { void x(void), void y(void) } }
  external_call_order: { x < y }
})";

inline const std::vector<RulePair>& rule_pairs() {
    static const std::vector<RulePair> pairs = {
        {"CFR1", "T1",
         "void e(void);\n", "void x(void);\nvoid z(void);\nvoid e(void) { z(); }\n",
         "void e(void);\n", "void x(void);\nvoid e(void) { x(); }\n",
         kBaseContract, {}},

        {"CFR2", "T12",
         "void e(void);\n", "void y(void);\nvoid e(void) { y(); }\n",
         "void e(void);\n", "void x(void);\nvoid y(void);\nvoid e(void) { x(); y(); }\n",
         kOrderContract, {}},

        {"CFR3", "T2",
         "void e(void);\n",
         "static int f(void) { return 0; }\nvoid e(void) { int (*fp)(void) = f; fp(); }\n",
         "void e(void);\n",
         "static int f(void) { return 0; }\nvoid e(void) { f(); }\n",
         "", {}},

        {"CFR4", "T3",
         "void e(void);\nint helper(void) { return 0; }\n", "void e(void) { }\n",
         "void e(void);\n", "void e(void) { }\n",
         "", {}},

        {"CFR5", "T4",
         "void e(void);\n", "#include \"part.inc\"\nvoid e(void) { }\n",
         "void e(void);\n", "#include \"part.h\"\nvoid e(void) { }\n",
         "", {{"part.inc", "\n"}, {"part.h", "\n"}}},

        {"CFR6", "T5",
         "static void e(void);\n", "void e(void) { }\n",
         "void e(void);\n", "void e(void) { }\n",
         kBaseContract, {}},

        {"CFR7", "T6",
         "void e(void);\n", "static void e(void) { }\n",
         "void e(void);\n", "void e(void) { }\n",
         kBaseContract, {}},

        {"CFR8", "T7",
         "void e(void);\n", "void helper(void) { }\nvoid e(void) { }\n",
         "void e(void);\n", "static void helper(void) { }\nvoid e(void) { helper(); }\n",
         kBaseContract, {}},

        {"CFR9", "T7",
         "void e(void);\nvoid helper(void);\n",
         "static void helper(void) { }\nvoid e(void) { helper(); }\n",
         "void e(void);\n",
         "static void helper(void) { }\nvoid e(void) { helper(); }\n",
         kBaseContract, {}},

        {"CFR10", "T5",
         "void e(void);\n", "extern int shared_var;\nvoid e(void) { }\n",
         "extern void e(void);\n", "void e(void) { }\n",  // entry exemption
         kBaseContract, {}},

        {"CFR11", "T5",
         "int e(void);\n", "int e(void) { return 0; }\n",
         "void e(void);\n", "void e(void) { }\n",
         kBaseContract, {}},

        {"DFR1", "T8",
         "void e(void);\n", "int g;\nvoid e(void) { g = 1; }\n",
         "void e(void);\n", "static int g;\nvoid e(void) { g = 1; }\n",
         "", {}},

        {"DFR2", "T10",
         "void e(int *p);\n", "void e(int *p) { p = p + 1; }\n",
         "void e(void);\n", "static int a[4];\nvoid e(void) { a[1] = a[0]; }\n",
         "", {}},

        {"DFR3", "T10",
         "void e(void *v);\n", "static int s;\nvoid e(void *v) { int *p = (int*)v; s = 0; }\n",
         "void e(int *p);\n", "void e(int *p) { if (p) { } }\n",
         "", {}},

        {"DFR4", "T9",
         "void e(void);\n", "static int g;\nvoid e(void) { if (g) { } }\n",
         "void e(void);\n", "static int g = 1;\nvoid e(void) { if (g) { } }\n",
         kBaseContract, {}},

        {"DFR5", "T10",
         "void e(void);\n", "void e(void) { int *p = 0; if (p) { } }\n",
         "void e(void);\n", "void e(void) { int x = 0; if (x) { } }\n",
         "", {}},

        {"DFR6", "T11",
         "void e(void);\n", "static int g;\nvoid e(void) { g = 1; }\n",
         "void e(void);\n", "typedef int tS32;\nstatic tS32 g;\nvoid e(void) { g = 1; }\n",
         "", {}},
    };
    return pairs;
}

// Parse one side of a pair and run the owning task.
inline modcheck::RuleResult run_pair_side(const RulePair& p, bool violating) {
    testutil::TempModule tm("rule_" + p.rule_id + (violating ? "_v" : "_c"));
    for (const auto& [name, content] : p.extra_files) tm.write(name, content);
    modcheck::cfront::PreprocConfig pcfg;
    pcfg.null_macros = {"NULL"};
    auto m = tm.make(violating ? p.violating_h : p.conforming_h,
                     violating ? p.violating_c : p.conforming_c, pcfg);
    std::optional<modcheck::isc::ISContract> c;
    if (!p.contract_text.empty()) c = modcheck::isc::parse_contract(p.contract_text);
    return modcheck::rules::run_task(p.task_id, m, c ? &*c : nullptr, {});
}

} // namespace rulefix
