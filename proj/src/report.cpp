#include "modcheck/report.hpp"

#include <sstream>

#include "json.hpp"

namespace modcheck::report {

using nlohmann::json;

namespace {

CheckStatus status_from(const std::string& s) {
    if (s == "pass") return CheckStatus::Pass;
    if (s == "fail") return CheckStatus::Fail;
    if (s == "skipped") return CheckStatus::Skipped;
    return CheckStatus::Error;
}

const char* mark(CheckStatus s) {
    switch (s) {
    case CheckStatus::Pass: return "ok";
    case CheckStatus::Fail: return "FAIL";
    case CheckStatus::Skipped: return "skip";
    case CheckStatus::Error: return "ERROR";
    }
    return "?";
}

bool task_has_warnings(const RuleResult& t) {
    for (const auto& d : t.diagnostics)
        if (d.severity == Severity::Warning) return true;
    return false;
}

} // namespace

std::string compute_verdict(const std::vector<RuleResult>& tasks,
                            const std::vector<CriticOutcome>& critics, bool strict_advisory) {
    for (const auto& t : tasks)
        if (t.status == CheckStatus::Error) return "error";
    for (const auto& c : critics)
        if (c.status == CheckStatus::Error && c.required) return "error";
    for (const auto& t : tasks) {
        if (t.status == CheckStatus::Fail) return "not-verified";
        if (strict_advisory && t.status == CheckStatus::Pass && task_has_warnings(t))
            return "not-verified";
    }
    for (const auto& c : critics)
        if (c.status == CheckStatus::Fail) return "not-verified";
    return "verified";
}

Report aggregate(std::string module_name, std::string contract_path,
                 std::vector<RuleResult> tasks, std::vector<CriticOutcome> critics,
                 bool strict_advisory, std::string tool_version, std::string timestamp) {
    Report r;
    r.module_name = std::move(module_name);
    r.contract_path = std::move(contract_path);
    r.tool_version = std::move(tool_version);
    r.timestamp = std::move(timestamp);
    r.verdict = compute_verdict(tasks, critics, strict_advisory);
    r.tasks = std::move(tasks);
    r.critics = std::move(critics);
    return r;
}

std::string render_text(const Report& r) {
    std::ostringstream out;
    out << "module: " << r.module_name;
    if (!r.contract_path.empty()) out << "    contract: " << r.contract_path;
    out << "\n";
    out << "check      result   time\n";
    out << "---------  -------  --------\n";
    char buf[64];
    for (const auto& t : r.tasks) {
        std::snprintf(buf, sizeof buf, "%-9s  %-7s  %.3fs\n", t.task_id.c_str(),
                      mark(t.status), t.duration_s);
        out << buf;
        if (t.status == CheckStatus::Skipped || t.status == CheckStatus::Error)
            out << "           " << t.skip_reason << "\n";
        for (const auto& d : t.diagnostics)
            out << "           [" << d.rule_id << " " << to_string(d.severity) << "] "
                << to_string(d.loc) << ": " << d.message << "\n";
    }
    for (const auto& c : r.critics) {
        std::string name = "critic:" + c.name;
        std::snprintf(buf, sizeof buf, "%-9s  %-7s  %.3fs", name.c_str(), mark(c.status),
                      c.duration_s);
        out << buf;
        if (!c.detail.empty()) {
            out << "  (";
            bool first = true;
            for (const auto& [k, v] : c.detail) {
                if (!first) out << ", ";
                out << k << "=" << v;
                first = false;
            }
            out << ")";
        }
        out << "\n";
        if (!c.skip_reason.empty()) out << "           " << c.skip_reason << "\n";
    }
    if (r.tasks.empty() && r.critics.empty()) out << "warning: no checks executed\n";
    out << "VERDICT: " << r.verdict << "\n";
    return out.str();
}

std::string render_json(const Report& r, bool canonical) {
    json j;
    j["schema_version"] = r.schema_version;
    j["module_name"] = r.module_name;
    j["contract_path"] = r.contract_path;
    j["tool_version"] = r.tool_version;
    if (!canonical) j["timestamp"] = r.timestamp;
    j["verdict"] = r.verdict;
    j["tasks"] = json::array();
    for (const auto& t : r.tasks) {
        json jt;
        jt["task_id"] = t.task_id;
        jt["status"] = to_string(t.status);
        if (!canonical) jt["duration_s"] = t.duration_s;
        jt["skip_reason"] = t.skip_reason;
        jt["diagnostics"] = json::array();
        for (const auto& d : t.diagnostics) {
            json jd;
            jd["rule_id"] = d.rule_id;
            jd["task_id"] = d.task_id;
            jd["severity"] = to_string(d.severity);
            jd["message"] = d.message;
            jd["file"] = d.loc.file;
            jd["line"] = d.loc.line;
            jd["column"] = d.loc.column;
            jd["subject"] = d.subject;
            jt["diagnostics"].push_back(std::move(jd));
        }
        j["tasks"].push_back(std::move(jt));
    }
    j["critics"] = json::array();
    for (const auto& c : r.critics) {
        json jc;
        jc["name"] = c.name;
        jc["status"] = to_string(c.status);
        jc["required"] = c.required;
        jc["detail"] = c.detail;
        jc["raw_excerpt"] = c.raw_excerpt;
        if (!canonical) jc["duration_s"] = c.duration_s;
        jc["skip_reason"] = c.skip_reason;
        j["critics"].push_back(std::move(jc));
    }
    return j.dump(2) + "\n";
}

Report report_from_json(const std::string& text) {
    json j = json::parse(text);
    Report r;
    r.schema_version = j.at("schema_version").get<int>();
    r.module_name = j.at("module_name").get<std::string>();
    r.contract_path = j.at("contract_path").get<std::string>();
    r.tool_version = j.at("tool_version").get<std::string>();
    r.timestamp = j.value("timestamp", "");
    r.verdict = j.at("verdict").get<std::string>();
    for (const auto& jt : j.at("tasks")) {
        RuleResult t;
        t.task_id = jt.at("task_id").get<std::string>();
        t.status = status_from(jt.at("status").get<std::string>());
        t.duration_s = jt.value("duration_s", 0.0);
        t.skip_reason = jt.value("skip_reason", "");
        for (const auto& jd : jt.at("diagnostics")) {
            Diagnostic d;
            d.rule_id = jd.at("rule_id").get<std::string>();
            d.task_id = jd.at("task_id").get<std::string>();
            d.severity = jd.at("severity").get<std::string>() == "warning"
                             ? Severity::Warning
                             : Severity::Violation;
            d.message = jd.at("message").get<std::string>();
            d.loc.file = jd.at("file").get<std::string>();
            d.loc.line = jd.at("line").get<int>();
            d.loc.column = jd.at("column").get<int>();
            d.subject = jd.at("subject").get<std::string>();
            t.diagnostics.push_back(std::move(d));
        }
        r.tasks.push_back(std::move(t));
    }
    for (const auto& jc : j.at("critics")) {
        CriticOutcome c;
        c.name = jc.at("name").get<std::string>();
        c.status = status_from(jc.at("status").get<std::string>());
        c.required = jc.at("required").get<bool>();
        c.detail = jc.at("detail").get<std::map<std::string, long>>();
        c.raw_excerpt = jc.at("raw_excerpt").get<std::string>();
        c.duration_s = jc.value("duration_s", 0.0);
        c.skip_reason = jc.at("skip_reason").get<std::string>();
        r.critics.push_back(std::move(c));
    }
    return r;
}

} // namespace modcheck::report
