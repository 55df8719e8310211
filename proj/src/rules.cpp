#include "modcheck/rules.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

#include "modcheck/callorder.hpp"
#include "modcheck/dataflow.hpp"

namespace modcheck::rules {

using cfront::CModule;
using cfront::ConstructFlag;

namespace {

Diagnostic make(const std::string& rule, Severity sev, std::string msg, SourceLoc loc,
                std::string subject) {
    Diagnostic d;
    d.rule_id = rule;
    d.severity = sev;
    d.message = std::move(msg);
    d.loc = std::move(loc);
    d.subject = std::move(subject);
    return d;
}

std::set<std::string> entry_names(const isc::ISContract& c) {
    std::set<std::string> s;
    for (const auto& e : c.entry_points) s.insert(e.name);
    return s;
}

} // namespace

std::vector<Diagnostic> check_call_permissions(const CModule& m, const isc::ISContract& c) {
    std::vector<Diagnostic> out;
    std::set<std::string> entries = entry_names(c);
    for (const auto& cs : m.calls) {
        if (cs.via_pointer) continue;  // the function-pointer rule owns these
        if (m.defines(cs.callee) || entries.count(cs.callee)) continue;
        const isc::FunSignature* sig = c.find_external(cs.callee);
        if (!sig) {
            out.push_back(make("CFR1", Severity::Violation,
                               "call of '" + cs.callee +
                                   "' is not permitted by the interface specification",
                               cs.loc, cs.callee));
            continue;
        }
        if (static_cast<int>(sig->params.size()) != cs.args_arity) {
            out.push_back(make("CFR1", Severity::Violation,
                               "call of '" + cs.callee + "' passes " +
                                   std::to_string(cs.args_arity) + " arguments but " +
                                   std::to_string(sig->params.size()) + " are specified",
                               cs.loc, cs.callee));
        }
        auto group = c.external_group_of(cs.callee);
        if (group && group->size() > 2 && group->substr(group->size() - 2) == ".h") {
            // header-bound group: the callee must come from that header
            bool found = false;
            auto [lo, hi] = m.ext_decls.equal_range(cs.callee);
            for (auto it = lo; it != hi; ++it)
                if (it->second.header_basename == *group) found = true;
            if (!found)
                out.push_back(make("CFR1", Severity::Violation,
                                   "'" + cs.callee + "' is not declared in '" + *group +
                                       "' as the interface specification requires",
                                   cs.loc, cs.callee));
        }
    }
    sort_diags(out);
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<Diagnostic> check_no_function_pointers(const CModule& m) {
    std::vector<Diagnostic> out;
    for (const auto& f : m.construct_flags) {
        if (f.kind != ConstructFlag::FunctionPointer) continue;
        out.push_back(make("CFR3", Severity::Violation,
                           "function pointer use (" + f.detail + ")", f.loc, f.subject));
    }
    sort_diags(out);
    return out;
}

std::vector<Diagnostic> check_header_purity(const CModule& m) {
    std::vector<Diagnostic> out;
    for (const auto& hd : m.header_defs) {
        std::string what = hd.kind == cfront::HeaderDef::FunctionDefinition
                               ? "function definition"
                               : "variable initialization";
        out.push_back(make("CFR4", Severity::Violation,
                           what + " of '" + hd.name + "' in the header file", hd.loc, hd.name));
    }
    sort_diags(out);
    return out;
}

std::vector<Diagnostic> check_includes(const CModule& m) {
    std::vector<Diagnostic> out;
    for (const auto& inc : m.includes) {
        if (inc.is_header_suffix) continue;
        out.push_back(make("CFR5", Severity::Violation,
                           "#include of non-header file " + inc.directive_text, inc.loc,
                           inc.directive_text));
    }
    sort_diags(out);
    return out;
}

std::vector<Diagnostic> check_entry_declarations(const CModule& m, const isc::ISContract& c) {
    std::vector<Diagnostic> out;
    for (const auto& entry : c.entry_points) {
        const cfront::FunDeclSite* header_decl = nullptr;
        for (const auto& d : m.decls)
            if (d.signature.name == entry.name && d.declared_in == cfront::DeclaredIn::Header) {
                header_decl = &d;
                break;
            }
        if (!header_decl) {
            out.push_back(make("CFR6", Severity::Violation,
                               "entry point '" + entry.name +
                                   "' is not declared in the header file",
                               SourceLoc{m.h_path, 1, 1}, entry.name));
            continue;
        }
        if (header_decl->is_static)
            out.push_back(make("CFR6", Severity::Violation,
                               "entry point '" + entry.name + "' is declared static",
                               header_decl->loc, entry.name));
        const auto& sig = header_decl->signature;
        bool match = sig.return_type == entry.return_type && sig.params == entry.params;
        if (!match) {
            std::string have = sig.return_type + " " + sig.name + "(";
            for (size_t i = 0; i < sig.params.size(); ++i)
                have += (i ? ", " : "") + sig.params[i];
            have += ")";
            out.push_back(make("CFR11", Severity::Violation,
                               "declaration of '" + entry.name + "' is '" + have +
                                   "' but the interface specification requires '" +
                                   isc::signature_text(entry) + "'",
                               header_decl->loc, entry.name));
        }
    }
    sort_diags(out);
    return out;
}

std::vector<Diagnostic> check_entry_definitions(const CModule& m, const isc::ISContract& c) {
    std::vector<Diagnostic> out;
    for (const auto& entry : c.entry_points) {
        const cfront::FunDeclSite* def = m.definition_of(entry.name);
        if (!def || def->declared_in != cfront::DeclaredIn::Source) {
            out.push_back(make("CFR7", Severity::Violation,
                               "entry point '" + entry.name +
                                   "' has no definition in the source file",
                               SourceLoc{m.c_path, 1, 1}, entry.name));
            continue;
        }
        if (def->is_static)
            out.push_back(make("CFR7", Severity::Violation,
                               "entry point '" + entry.name + "' is defined static", def->loc,
                               entry.name));
    }
    sort_diags(out);
    return out;
}

std::vector<Diagnostic> check_local_functions(const CModule& m, const isc::ISContract& c) {
    std::vector<Diagnostic> out;
    std::set<std::string> entries = entry_names(c);
    // non-entry definitions must be static
    for (const auto& d : m.decls) {
        if (!d.is_definition || entries.count(d.signature.name)) continue;
        if (!d.is_static)
            out.push_back(make("CFR8", Severity::Violation,
                               "local function '" + d.signature.name + "' is not static",
                               d.loc, d.signature.name));
    }
    // the header declares only entry points
    std::set<std::string> reported;
    for (const auto& d : m.decls) {
        if (d.declared_in != cfront::DeclaredIn::Header) continue;
        if (entries.count(d.signature.name)) continue;
        if (!reported.insert(d.signature.name).second) continue;
        out.push_back(make("CFR9", Severity::Violation,
                           "'" + d.signature.name +
                               "' is declared in the header file but is not an entry point",
                           d.loc, d.signature.name));
    }
    sort_diags(out);
    return out;
}

std::vector<Diagnostic> check_globals_static(const CModule& m) {
    std::vector<Diagnostic> out;
    for (const auto& g : m.globals) {
        if (g.declared_in == cfront::DeclaredIn::Header)
            out.push_back(make("DFR1", Severity::Violation,
                               "module variable '" + g.name + "' is declared in the header file",
                               g.loc, g.name));
        else if (!g.is_static)
            out.push_back(make("DFR1", Severity::Violation,
                               "module variable '" + g.name + "' is not static", g.loc, g.name));
    }
    sort_diags(out);
    return out;
}

std::vector<Diagnostic> check_no_pointer_literals(const CModule& m) {
    std::vector<Diagnostic> out;
    for (const auto& f : m.construct_flags) {
        if (f.kind != ConstructFlag::PointerLiteral) continue;
        out.push_back(make("DFR5", Severity::Violation,
                           "integer literal " + f.detail + " used as a pointer value", f.loc,
                           f.subject));
    }
    sort_diags(out);
    return out;
}

std::vector<Diagnostic> check_typedef_usage(const CModule& m, const isc::ISContract* c,
                                            const CheckConfig& cfg) {
    std::vector<Diagnostic> out;
    std::set<std::string> entries = c ? entry_names(*c) : std::set<std::string>{};
    for (const auto& u : m.raw_type_uses) {
        if (cfg.typedef_allowlist.count(u.raw_base)) continue;
        // multi-keyword bases pass when every keyword is allowed
        {
            std::istringstream in(u.raw_base);
            std::string tok;
            bool all = true, any = false;
            while (in >> tok) {
                any = true;
                if (!cfg.typedef_allowlist.count(tok)) all = false;
            }
            if (any && all) continue;
        }
        // signatures the contract itself spells with raw types are exempt
        if ((u.context == "param" || u.context == "return") && entries.count(u.owner_fn))
            continue;
        out.push_back(make("DFR6", Severity::Warning,
                           "raw base type '" + u.raw_base + "' in " + u.context +
                               " declaration; use a project typedef",
                           u.loc, u.raw_base));
    }
    sort_diags(out);
    return out;
}

std::vector<Diagnostic> check_no_extern(const CModule& m, const isc::ISContract& c) {
    std::vector<Diagnostic> out;
    std::set<std::string> entries = entry_names(c);
    for (const auto& f : m.construct_flags) {
        if (f.kind != ConstructFlag::ExternKeyword) continue;
        if (f.detail == "function-declaration" && entries.count(f.subject)) continue;
        out.push_back(make("CFR10", Severity::Violation,
                           "'extern' used in a " + f.detail, f.loc, f.subject));
    }
    sort_diags(out);
    return out;
}

std::vector<Diagnostic> check_pointer_discipline(const CModule& m) {
    std::vector<Diagnostic> out;
    for (const auto& f : m.construct_flags) {
        if (f.kind == ConstructFlag::PointerArith)
            out.push_back(make("DFR2", Severity::Violation,
                               "pointer arithmetic ('" + f.detail + "')", f.loc, f.subject));
        else if (f.kind == ConstructFlag::PointerCast)
            out.push_back(make("DFR3", Severity::Violation,
                               "explicit " + f.detail + " cast", f.loc, f.subject));
    }
    sort_diags(out);
    return out;
}

const std::vector<std::string>& all_tasks() {
    static const std::vector<std::string> tasks = {"T1", "T2", "T3",  "T4",  "T5",  "T6",
                                                   "T7", "T8", "T9", "T10", "T11", "T12"};
    return tasks;
}

const std::map<std::string, std::vector<std::string>>& task_rule_map() {
    static const std::map<std::string, std::vector<std::string>> map = {
        {"T1", {"CFR1"}},
        {"T2", {"CFR3"}},
        {"T3", {"CFR4"}},
        {"T4", {"CFR5"}},
        {"T5", {"CFR6", "CFR11", "CFR10"}},
        {"T6", {"CFR7"}},
        {"T7", {"CFR8", "CFR9"}},
        {"T8", {"DFR1"}},
        {"T9", {"DFR4"}},
        {"T10", {"DFR5", "DFR2", "DFR3"}},
        {"T11", {"DFR6"}},
        {"T12", {"CFR2"}},
    };
    return map;
}

bool task_needs_contract(const std::string& task) {
    static const std::set<std::string> needs = {"T1", "T5", "T6", "T7", "T9", "T12"};
    return needs.count(task) != 0;
}

RuleResult run_task(const std::string& task, const CModule& m, const isc::ISContract* contract,
                    const CheckConfig& cfg) {
    RuleResult r;
    r.task_id = task;
    if (task_needs_contract(task) && !contract) {
        r.status = CheckStatus::Skipped;
        r.skip_reason = "no interface specification provided";
        return r;
    }
    auto t0 = std::chrono::steady_clock::now();
    std::vector<Diagnostic>& ds = r.diagnostics;
    if (task == "T1") ds = check_call_permissions(m, *contract);
    else if (task == "T2") ds = check_no_function_pointers(m);
    else if (task == "T3") ds = check_header_purity(m);
    else if (task == "T4") ds = check_includes(m);
    else if (task == "T5") {
        ds = check_entry_declarations(m, *contract);
        auto ex = check_no_extern(m, *contract);
        ds.insert(ds.end(), ex.begin(), ex.end());
        sort_diags(ds);
    } else if (task == "T6") ds = check_entry_definitions(m, *contract);
    else if (task == "T7") ds = check_local_functions(m, *contract);
    else if (task == "T8") ds = check_globals_static(m);
    else if (task == "T9") ds = dataflow::check_init_before_read(m, *contract);
    else if (task == "T10") {
        ds = check_no_pointer_literals(m);
        auto pd = check_pointer_discipline(m);
        ds.insert(ds.end(), pd.begin(), pd.end());
        sort_diags(ds);
    } else if (task == "T11") ds = check_typedef_usage(m, contract, cfg);
    else if (task == "T12") ds = callorder::check_call_order(m, *contract);
    else {
        r.status = CheckStatus::Error;
        r.skip_reason = "unknown task '" + task + "'";
        return r;
    }
    for (auto& d : ds) d.task_id = task;
    r.status = has_violation(ds) ? CheckStatus::Fail : CheckStatus::Pass;
    r.duration_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

} // namespace modcheck::rules
