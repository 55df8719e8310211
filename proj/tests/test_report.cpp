#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "modcheck/report.hpp"

using namespace modcheck;
using namespace modcheck::report;

namespace {

RuleResult task(std::string id, CheckStatus st, Severity sev = Severity::Violation) {
    RuleResult r;
    r.task_id = std::move(id);
    r.status = st;
    r.duration_s = 0.01;
    if (st == CheckStatus::Fail || sev == Severity::Warning) {
        Diagnostic d;
        d.rule_id = "CFR1";
        d.task_id = r.task_id;
        d.severity = sev;
        d.message = "finding";
        d.loc = {"m.c", 3, 5};
        d.subject = "f";
        r.diagnostics.push_back(d);
    }
    if (st == CheckStatus::Skipped) r.skip_reason = "no contract configured";
    return r;
}

CriticOutcome critic(std::string name, CheckStatus st, bool required = true) {
    CriticOutcome c;
    c.name = std::move(name);
    c.status = st;
    c.required = required;
    c.duration_s = 0.2;
    if (st == CheckStatus::Skipped) c.skip_reason = "gate failed";
    return c;
}

Report sample() {
    return aggregate("tmon", "tmon.is",
                     {task("T1", CheckStatus::Pass), task("T2", CheckStatus::Fail),
                      task("T5", CheckStatus::Skipped),
                      task("T11", CheckStatus::Pass, Severity::Warning)},
                     {critic("compile", CheckStatus::Pass)}, false, "modcheck 1.0.0",
                     "2026-01-01T00:00:00Z");
}

} // namespace

TEST_CASE("verdict: all passing is verified, skips do not block") {
    CHECK(compute_verdict({task("T1", CheckStatus::Pass), task("T5", CheckStatus::Skipped)},
                          {critic("c", CheckStatus::Pass)}, false) == "verified");
    CHECK(compute_verdict({}, {}, false) == "verified");  // vacuous
}

TEST_CASE("verdict: any failing task or critic blocks verification") {
    CHECK(compute_verdict({task("T1", CheckStatus::Fail)}, {}, false) == "not-verified");
    CHECK(compute_verdict({task("T1", CheckStatus::Pass)}, {critic("c", CheckStatus::Fail)},
                          false) == "not-verified");
    // skipped critics do not block on their own; the failing gate does
    CHECK(compute_verdict({task("T1", CheckStatus::Pass)},
                          {critic("gate", CheckStatus::Fail), critic("c", CheckStatus::Skipped)},
                          false) == "not-verified");
}

TEST_CASE("verdict: errors dominate") {
    CHECK(compute_verdict({task("T1", CheckStatus::Error), task("T2", CheckStatus::Fail)}, {},
                          false) == "error");
    CHECK(compute_verdict({task("T1", CheckStatus::Pass)}, {critic("c", CheckStatus::Error)},
                          false) == "error");
    // a non-required critic error is recorded but does not raise the verdict
    CHECK(compute_verdict({task("T1", CheckStatus::Pass)},
                          {critic("c", CheckStatus::Error, false)}, false) == "verified");
}

TEST_CASE("strict advisory mode turns warnings into blockers") {
    auto warned = {task("T11", CheckStatus::Pass, Severity::Warning)};
    CHECK(compute_verdict(warned, {}, false) == "verified");
    CHECK(compute_verdict(warned, {}, true) == "not-verified");
}

TEST_CASE("json round-trip is lossless") {
    Report r = sample();
    Report back = report_from_json(render_json(r, false));
    CHECK(back.schema_version == r.schema_version);
    CHECK(back.module_name == r.module_name);
    CHECK(back.contract_path == r.contract_path);
    CHECK(back.timestamp == r.timestamp);
    CHECK(back.tool_version == r.tool_version);
    CHECK(back.verdict == r.verdict);
    REQUIRE(back.tasks.size() == r.tasks.size());
    for (size_t i = 0; i < r.tasks.size(); ++i) {
        CHECK(back.tasks[i].task_id == r.tasks[i].task_id);
        CHECK(back.tasks[i].status == r.tasks[i].status);
        CHECK(back.tasks[i].skip_reason == r.tasks[i].skip_reason);
        CHECK(back.tasks[i].duration_s == doctest::Approx(r.tasks[i].duration_s));
        REQUIRE(back.tasks[i].diagnostics.size() == r.tasks[i].diagnostics.size());
        for (size_t j = 0; j < r.tasks[i].diagnostics.size(); ++j)
            CHECK(back.tasks[i].diagnostics[j] == r.tasks[i].diagnostics[j]);
    }
    REQUIRE(back.critics.size() == r.critics.size());
    CHECK(back.critics[0].name == r.critics[0].name);
    CHECK(back.critics[0].status == r.critics[0].status);
    CHECK(back.critics[0].required == r.critics[0].required);
    // round-trip of the round-trip is byte-identical
    CHECK(render_json(back, false) == render_json(r, false));
}

TEST_CASE("canonical rendering drops volatile fields and is deterministic") {
    Report a = sample();
    Report b = sample();
    b.timestamp = "2030-12-31T23:59:59Z";
    b.tasks[0].duration_s = 99.0;
    b.critics[0].duration_s = 42.0;
    CHECK(render_json(a, true) == render_json(b, true));
    CHECK(render_json(a, false) != render_json(b, false));
    CHECK(render_json(a, true).find("timestamp") == std::string::npos);
    CHECK(render_json(a, true).find("duration") == std::string::npos);
}

TEST_CASE("text rendering carries statuses, findings and the verdict") {
    Report r = sample();
    std::string t = render_text(r);
    CHECK(t.find("tmon") != std::string::npos);
    CHECK(t.find("T2") != std::string::npos);
    CHECK(t.find("FAIL") != std::string::npos);
    CHECK(t.find("skip") != std::string::npos);
    CHECK(t.find("no contract configured") != std::string::npos);
    CHECK(t.find("m.c:3:5") != std::string::npos);
    // verdict is the last line
    auto pos = t.rfind("VERDICT: ");
    REQUIRE(pos != std::string::npos);
    CHECK(t.find('\n', pos) == t.size() - 1);
    CHECK(t.substr(pos) == "VERDICT: not-verified\n");
}

TEST_CASE("an empty report warns that nothing ran") {
    Report r = aggregate("m", "", {}, {}, false, "modcheck 1.0.0", "");
    CHECK(r.verdict == "verified");
    CHECK(render_text(r).find("no checks executed") != std::string::npos);
}
