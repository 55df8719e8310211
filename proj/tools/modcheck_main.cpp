#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "modcheck/orchestrator.hpp"

int main(int argc, char** argv) {
    CLI::App app{"modcheck: interface-contract checker for C header/source module pairs"};
    app.set_version_flag("--version", modcheck::orch::kToolVersion);

    modcheck::orch::RunConfig cfg;
    std::vector<std::string> tasks;
    std::vector<std::string> defines;
    std::vector<std::string> null_macros;
    std::vector<std::string> allowlist;
    bool all_tasks = false;

    app.add_option("--contract", cfg.contract_path, "interface specification (.is) file");
    app.add_option("--header", cfg.header_path, "module header (.h) file")->required();
    app.add_option("--source", cfg.source_path, "module source (.c) file")->required();
    app.add_option("--task", tasks, "task to run (T1..T12); repeatable");
    app.add_flag("--all", all_tasks, "run every task (default when no --task given)");
    app.add_option("-I,--include-dir", cfg.include_dirs, "include search directory");
    app.add_option("-D,--define", defines, "predefine macro SYM or SYM=VAL");
    app.add_option("--format", cfg.format, "report format: text or json")
        ->check(CLI::IsMember({"text", "json"}));
    app.add_flag("--strict-advisory", cfg.strict_advisory,
                 "advisory warnings block the verified verdict");
    app.add_flag("--canonical", cfg.canonical,
                 "omit timestamp and durations for reproducible output");
    app.add_option("--critics", cfg.critics_config_path, "critics configuration file (JSON)");
    app.add_option("--null-macro", null_macros,
                   "identifier treated as the null pointer constant (default NULL)");
    app.add_option("--typedef-allow", allowlist,
                   "raw base type tolerated by the typedef-usage check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (!all_tasks) cfg.tasks = tasks;
    for (const auto& d : defines) {
        size_t eq = d.find('=');
        if (eq == std::string::npos) cfg.defines[d] = "1";
        else cfg.defines[d.substr(0, eq)] = d.substr(eq + 1);
    }
    for (const auto& n : null_macros) cfg.null_macros.insert(n);
    for (const auto& a : allowlist) cfg.typedef_allowlist.insert(a);

    modcheck::orch::RunOutcome out = modcheck::orch::run_check(cfg);
    std::cout << out.rendered;
    return out.exit_status;
}
