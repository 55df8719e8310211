#include "modcheck/dataflow.hpp"

#include <algorithm>
#include <functional>

namespace modcheck::dataflow {

using cfront::CModule;
using cfront::Cfg;
using cfront::Event;

namespace {

// Definitely-written state per block entry; the lattice is sets of variable
// names under intersection, with the full universe as top.
struct FnAnalysis {
    std::vector<std::set<std::string>> in_state;
    std::set<std::string> exit_state;
};

std::set<std::string> universe_of(const CModule& m) {
    std::set<std::string> u;
    for (const auto& g : m.globals) u.insert(g.name);
    return u;
}

void apply_event(const Event& ev, const std::set<std::string>& universe,
                 const std::map<std::string, EffectSummary>& done,
                 std::set<std::string>& written) {
    switch (ev.kind) {
    case Event::WriteWhole:
        if (universe.count(ev.name)) written.insert(ev.name);
        break;
    case Event::Call: {
        auto it = done.find(ev.name);
        if (it != done.end())
            written.insert(it->second.must_write.begin(), it->second.must_write.end());
        break;
    }
    default:
        break;
    }
}

FnAnalysis fixpoint(const Cfg& cfg, const std::set<std::string>& universe,
                    const std::map<std::string, EffectSummary>& done) {
    FnAnalysis fa;
    int n = static_cast<int>(cfg.blocks.size());
    fa.in_state.assign(n, universe);  // top
    fa.in_state[cfg.entry].clear();
    bool changed = true;
    while (changed) {
        changed = false;
        for (int b = 0; b < n; ++b) {
            std::set<std::string> st = fa.in_state[b];
            for (const auto& ev : cfg.blocks[b].events) apply_event(ev, universe, done, st);
            for (int s : cfg.blocks[b].succs) {
                std::set<std::string> met;
                std::set_intersection(st.begin(), st.end(), fa.in_state[s].begin(),
                                      fa.in_state[s].end(), std::inserter(met, met.begin()));
                if (met != fa.in_state[s]) {
                    fa.in_state[s] = std::move(met);
                    changed = true;
                }
            }
        }
    }
    fa.exit_state = fa.in_state[cfg.exit];
    return fa;
}

EffectSummary summarize(const Cfg& cfg, const std::set<std::string>& universe,
                        const std::map<std::string, EffectSummary>& done) {
    FnAnalysis fa = fixpoint(cfg, universe, done);
    EffectSummary s;
    s.must_write = fa.exit_state;
    for (size_t b = 0; b < cfg.blocks.size(); ++b) {
        std::set<std::string> written = fa.in_state[b];
        for (const auto& ev : cfg.blocks[b].events) {
            switch (ev.kind) {
            case Event::Read:
                if (universe.count(ev.name)) {
                    s.may_read.insert(ev.name);
                    if (!written.count(ev.name) && s.may_rbw.insert(ev.name).second)
                        s.rbw_locs[ev.name] = ev.loc;
                }
                break;
            case Event::WriteWhole:
            case Event::WritePart:
                if (universe.count(ev.name)) s.may_write.insert(ev.name);
                break;
            case Event::Call: {
                auto it = done.find(ev.name);
                if (it != done.end()) {
                    const EffectSummary& c = it->second;
                    s.may_read.insert(c.may_read.begin(), c.may_read.end());
                    s.may_write.insert(c.may_write.begin(), c.may_write.end());
                    for (const auto& g : c.may_rbw)
                        if (!written.count(g) && s.may_rbw.insert(g).second)
                            s.rbw_locs[g] = c.rbw_locs.count(g) ? c.rbw_locs.at(g) : ev.loc;
                }
                break;
            }
            default:
                break;
            }
            apply_event(ev, universe, done, written);
        }
    }
    return s;
}

} // namespace

std::map<std::string, EffectSummary> compute_effects(const CModule& m) {
    std::set<std::string> universe = universe_of(m);

    // bottom-up over the (acyclic) local call graph
    std::map<std::string, std::set<std::string>> callees;
    for (const auto& cs : m.calls)
        if (m.defines(cs.callee) && m.defines(cs.caller)) callees[cs.caller].insert(cs.callee);

    std::map<std::string, EffectSummary> done;
    std::set<std::string> visiting;
    std::function<void(const std::string&)> visit = [&](const std::string& fn) {
        if (done.count(fn) || visiting.count(fn)) return;
        visiting.insert(fn);
        for (const auto& c : callees[fn]) visit(c);
        visiting.erase(fn);
        done[fn] = summarize(m.defs.at(fn), universe, done);
    };
    for (const auto& [fn, _] : m.defs) visit(fn);
    return done;
}

std::vector<Diagnostic> check_init_before_read(const CModule& m,
                                               const isc::ISContract& contract) {
    std::vector<Diagnostic> out;
    auto effects = compute_effects(m);
    isc::OrderClosure closure = isc::order_closure(contract.entry_order);

    for (const auto& g : m.address_taken_globals) {
        const auto* gv = m.global(g);
        Diagnostic d;
        d.rule_id = "DFR4";
        d.task_id = "T9";
        d.message = "address of module variable '" + g +
                    "' is taken; initialization order cannot be verified";
        d.subject = g;
        if (gv) d.loc = gv->loc;
        out.push_back(std::move(d));
    }

    for (const auto& entry : contract.entry_points) {
        auto it = effects.find(entry.name);
        if (it == effects.end()) continue;  // missing definitions are another task's finding
        for (const auto& g : it->second.may_rbw) {
            const auto* gv = m.global(g);
            if (gv && gv->has_initializer) continue;
            bool guaranteed = false;
            for (const auto& prior : contract.entry_points) {
                if (prior.name == entry.name) continue;
                if (!closure.ordered(prior.name, entry.name)) continue;
                auto pe = effects.find(prior.name);
                if (pe != effects.end() && pe->second.must_write.count(g)) {
                    guaranteed = true;
                    break;
                }
            }
            if (guaranteed) continue;
            Diagnostic d;
            d.rule_id = "DFR4";
            d.task_id = "T9";
            d.message = "'" + g + "' may be read in '" + entry.name +
                        "' before any guaranteed initialization";
            d.subject = g;
            auto lit = it->second.rbw_locs.find(g);
            if (lit != it->second.rbw_locs.end()) d.loc = lit->second;
            out.push_back(std::move(d));
        }
    }
    sort_diags(out);
    return out;
}

} // namespace modcheck::dataflow
