#include "modcheck/orchestrator.hpp"

#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <regex>
#include <sstream>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include "json.hpp"

#include "modcheck/frontend.hpp"
#include "modcheck/rules.hpp"

namespace modcheck::orch {

using nlohmann::json;

const char* kToolVersion = "modcheck 1.0.0";

std::vector<CriticSpec> load_critics_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open critics config '" + path + "'");
    json j = json::parse(in);
    if (!j.is_array()) throw std::runtime_error("critics config must be a JSON array");
    std::vector<CriticSpec> out;
    for (const auto& je : j) {
        CriticSpec s;
        s.name = je.at("name").get<std::string>();
        s.command = je.at("command").get<std::string>();
        if (s.command.empty())
            throw std::runtime_error("critic '" + s.name + "': empty command");
        if (je.contains("pass_exit_codes"))
            for (int c : je.at("pass_exit_codes")) s.pass_exit_codes.insert(c);
        s.pass_pattern = je.value("pass_pattern", "");
        if (je.contains("counter_patterns"))
            s.counter_patterns =
                je.at("counter_patterns").get<std::map<std::string, std::string>>();
        s.timeout_s = je.value("timeout_s", 60.0);
        if (s.timeout_s <= 0)
            throw std::runtime_error("critic '" + s.name + "': timeout must be positive");
        s.required = je.value("required", true);
        out.push_back(std::move(s));
    }
    return out;
}

SubprocessResult run_subprocess(const std::string& command, double timeout_s) {
    SubprocessResult r;
    int fds[2];
    if (pipe(fds) != 0) return r;
    pid_t pid = fork();
    if (pid < 0) {
        close(fds[0]);
        close(fds[1]);
        return r;
    }
    if (pid == 0) {
        dup2(fds[1], 1);
        dup2(fds[1], 2);
        close(fds[0]);
        close(fds[1]);
        setpgid(0, 0);
        execl("/bin/sh", "sh", "-c", command.c_str(), (char*)nullptr);
        _exit(127);
    }
    close(fds[1]);
    fcntl(fds[0], F_SETFL, O_NONBLOCK);

    auto deadline = std::chrono::steady_clock::now() +
                    std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                        std::chrono::duration<double>(timeout_s));
    bool open = true;
    while (open) {
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                        deadline - std::chrono::steady_clock::now())
                        .count();
        if (left <= 0) {
            r.timed_out = true;
            kill(-pid, SIGKILL);
            kill(pid, SIGKILL);
            break;
        }
        struct pollfd pfd{fds[0], POLLIN, 0};
        int pr = poll(&pfd, 1, static_cast<int>(std::min<long long>(left, 200)));
        if (pr > 0) {
            char buf[4096];
            ssize_t n;
            while ((n = read(fds[0], buf, sizeof buf)) > 0) r.output.append(buf, n);
            if (n == 0) open = false;
        }
    }
    // drain whatever is left after exit/kill
    char buf[4096];
    ssize_t n;
    while ((n = read(fds[0], buf, sizeof buf)) > 0) r.output.append(buf, n);
    close(fds[0]);
    int status = 0;
    waitpid(pid, &status, 0);
    if (WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
    else if (WIFSIGNALED(status)) r.exit_code = 128 + WTERMSIG(status);
    return r;
}

namespace {

std::string substitute(std::string tmpl, const std::string& source, const std::string& header,
                       const std::string& contract) {
    auto repl = [&](const std::string& key, const std::string& value) {
        std::string pat = "{" + key + "}";
        size_t p;
        while ((p = tmpl.find(pat)) != std::string::npos) tmpl.replace(p, pat.size(), value);
    };
    repl("source", source);
    repl("header", header);
    repl("contract", contract);
    return tmpl;
}

report::CriticOutcome run_one_critic(const CriticSpec& spec, const std::string& source,
                                     const std::string& header, const std::string& contract) {
    report::CriticOutcome o;
    o.name = spec.name;
    o.required = spec.required;
    std::string cmd = substitute(spec.command, source, header, contract);
    auto t0 = std::chrono::steady_clock::now();
    SubprocessResult sr = run_subprocess(cmd, spec.timeout_s);
    o.duration_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    constexpr size_t kExcerpt = 2000;
    o.raw_excerpt = sr.output.substr(0, kExcerpt);

    if (sr.timed_out) {
        o.status = CheckStatus::Error;
        o.skip_reason = "timed out after " + std::to_string(spec.timeout_s) + "s";
        return o;
    }
    if (sr.exit_code == 127) {
        o.status = CheckStatus::Error;
        o.skip_reason = "command not found or not runnable";
        return o;
    }
    for (const auto& [name, pat] : spec.counter_patterns) {
        std::smatch sm;
        if (std::regex_search(sr.output, sm, std::regex(pat)) && sm.size() > 1)
            o.detail[name] = std::stol(sm[1].str());
    }
    bool pass = spec.pass_exit_codes.count(sr.exit_code) != 0;
    if (pass && !spec.pass_pattern.empty())
        pass = std::regex_search(sr.output, std::regex(spec.pass_pattern));
    o.status = pass ? CheckStatus::Pass : CheckStatus::Fail;
    return o;
}

} // namespace

std::vector<report::CriticOutcome> run_critics(const std::vector<CriticSpec>& specs,
                                               const std::string& source,
                                               const std::string& header,
                                               const std::string& contract) {
    std::vector<report::CriticOutcome> out;
    bool gate_open = true;
    for (size_t i = 0; i < specs.size(); ++i) {
        if (i > 0 && !gate_open) {
            report::CriticOutcome o;
            o.name = specs[i].name;
            o.required = specs[i].required;
            o.status = CheckStatus::Skipped;
            o.skip_reason = "gate failed";
            out.push_back(std::move(o));
            continue;
        }
        report::CriticOutcome o = run_one_critic(specs[i], source, header, contract);
        if (i == 0 && o.status != CheckStatus::Pass) gate_open = false;
        out.push_back(std::move(o));
    }
    return out;
}

namespace {

std::string now_iso8601() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

bool file_exists(const std::string& p) {
    std::ifstream in(p);
    return in.good();
}

RunOutcome error_outcome(const RunConfig& cfg, const std::string& msg) {
    RunOutcome out;
    RuleResult r;
    r.task_id = "setup";
    r.status = CheckStatus::Error;
    r.skip_reason = msg;
    auto rep = report::aggregate("", cfg.contract_path, {std::move(r)}, {},
                                 cfg.strict_advisory, kToolVersion,
                                 cfg.canonical ? "" : now_iso8601());
    out.rendered = cfg.format == "json" ? report::render_json(rep, cfg.canonical)
                                        : report::render_text(rep);
    out.rep = std::move(rep);
    out.exit_status = 2;
    return out;
}

} // namespace

RunOutcome run_check(const RunConfig& cfg) {
    if (cfg.header_path.empty() || cfg.source_path.empty())
        return error_outcome(cfg, "both --header and --source are required");
    for (const std::string& p : {cfg.header_path, cfg.source_path})
        if (!file_exists(p)) return error_outcome(cfg, "cannot open '" + p + "'");
    if (!cfg.contract_path.empty() && !file_exists(cfg.contract_path))
        return error_outcome(cfg, "cannot open '" + cfg.contract_path + "'");

    std::optional<isc::ISContract> contract;
    if (!cfg.contract_path.empty()) {
        std::ifstream in(cfg.contract_path);
        std::stringstream ss;
        ss << in.rdbuf();
        try {
            contract = isc::parse_contract(ss.str(), cfg.contract_path);
        } catch (const isc::ContractError& e) {
            return error_outcome(cfg, std::string("contract error: ") + e.what());
        }
        auto problems = isc::validate_contract(*contract);
        if (has_violation(problems)) {
            std::string msg = "invalid contract:";
            for (const auto& d : problems) msg += " " + d.message + ";";
            return error_outcome(cfg, msg);
        }
    }

    cfront::PreprocConfig pcfg;
    pcfg.include_dirs = cfg.include_dirs;
    pcfg.defines = cfg.defines;
    pcfg.null_macros = cfg.null_macros;
    // directories of the module files are implicit include roots
    auto dir_of = [](const std::string& p) {
        size_t s = p.find_last_of('/');
        return s == std::string::npos ? std::string(".") : p.substr(0, s);
    };
    pcfg.include_dirs.push_back(dir_of(cfg.header_path));
    pcfg.include_dirs.push_back(dir_of(cfg.source_path));

    cfront::CModule m;
    try {
        m = cfront::parse_module(cfg.header_path, cfg.source_path, pcfg);
    } catch (const cfront::FrontendError& e) {
        return error_outcome(cfg, std::string("frontend error: ") + e.what());
    }

    std::vector<std::string> tasks = cfg.tasks.empty() ? rules::all_tasks() : cfg.tasks;
    for (const auto& t : tasks)
        if (rules::task_rule_map().find(t) == rules::task_rule_map().end())
            return error_outcome(cfg, "unknown task '" + t + "'");

    rules::CheckConfig rcfg;
    rcfg.typedef_allowlist = cfg.typedef_allowlist;
    std::vector<RuleResult> results;
    for (const auto& t : tasks)
        results.push_back(
            rules::run_task(t, m, contract ? &*contract : nullptr, rcfg));

    std::vector<report::CriticOutcome> critics;
    if (!cfg.critics_config_path.empty()) {
        std::vector<CriticSpec> specs;
        try {
            specs = load_critics_config(cfg.critics_config_path);
        } catch (const std::exception& e) {
            return error_outcome(cfg, std::string("critics config error: ") + e.what());
        }
        critics = run_critics(specs, cfg.source_path, cfg.header_path, cfg.contract_path);
    }

    RunOutcome out;
    out.rep = report::aggregate(m.name, cfg.contract_path, std::move(results),
                                std::move(critics), cfg.strict_advisory, kToolVersion,
                                cfg.canonical ? "" : now_iso8601());
    out.rendered = cfg.format == "json" ? report::render_json(out.rep, cfg.canonical)
                                        : report::render_text(out.rep);
    if (out.rep.verdict == "verified") out.exit_status = 0;
    else if (out.rep.verdict == "not-verified") out.exit_status = 1;
    else out.exit_status = 2;
    return out;
}

} // namespace modcheck::orch
