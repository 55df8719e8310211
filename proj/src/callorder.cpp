#include "modcheck/callorder.hpp"

#include <algorithm>
#include <functional>

namespace modcheck::callorder {

using cfront::CModule;
using cfront::Cfg;
using cfront::Event;

namespace {

std::set<std::string> callee_universe(const CModule& m) {
    std::set<std::string> u;
    for (const auto& cs : m.calls)
        if (!cs.via_pointer) u.insert(cs.callee);
    return u;
}

// definitely-called-so-far state per block entry (meet = intersection)
std::vector<std::set<std::string>> called_fixpoint(
    const Cfg& cfg, const std::set<std::string>& universe,
    const std::map<std::string, CallSequenceSummary>& done) {
    int n = static_cast<int>(cfg.blocks.size());
    std::vector<std::set<std::string>> in_state(n, universe);
    in_state[cfg.entry].clear();
    bool changed = true;
    while (changed) {
        changed = false;
        for (int b = 0; b < n; ++b) {
            std::set<std::string> st = in_state[b];
            for (const auto& ev : cfg.blocks[b].events) {
                if (ev.kind != Event::Call || ev.via_pointer) continue;
                auto it = done.find(ev.name);
                if (it != done.end())
                    st.insert(it->second.must_call.begin(), it->second.must_call.end());
                st.insert(ev.name);
            }
            for (int s : cfg.blocks[b].succs) {
                std::set<std::string> met;
                std::set_intersection(st.begin(), st.end(), in_state[s].begin(),
                                      in_state[s].end(), std::inserter(met, met.begin()));
                if (met != in_state[s]) {
                    in_state[s] = std::move(met);
                    changed = true;
                }
            }
        }
    }
    return in_state;
}

CallSequenceSummary summarize_one(const Cfg& cfg, const std::set<std::string>& universe,
                                  const std::map<std::string, CallSequenceSummary>& done) {
    CallSequenceSummary s;
    auto in_state = called_fixpoint(cfg, universe, done);
    s.must_call = in_state[cfg.exit];
    for (size_t b = 0; b < cfg.blocks.size(); ++b) {
        std::set<std::string> st = in_state[b];
        for (const auto& ev : cfg.blocks[b].events) {
            if (ev.kind != Event::Call || ev.via_pointer) continue;
            auto it = done.find(ev.name);
            if (it != done.end()) {
                // splice: callee sites become sites here, prefixed by our state
                for (const auto& cs : it->second.sites) {
                    CallSiteInfo site = cs;
                    site.must_before.insert(st.begin(), st.end());
                    s.sites.push_back(std::move(site));
                }
                s.may_call.insert(it->second.may_call.begin(), it->second.may_call.end());
                st.insert(it->second.must_call.begin(), it->second.must_call.end());
            }
            s.sites.push_back({ev.name, ev.loc, st});
            s.may_call.insert(ev.name);
            st.insert(ev.name);
        }
    }
    return s;
}

} // namespace

std::map<std::string, CallSequenceSummary> summarize_call_sequences(const CModule& m) {
    std::set<std::string> universe = callee_universe(m);
    std::map<std::string, std::set<std::string>> callees;
    for (const auto& cs : m.calls)
        if (m.defines(cs.callee) && m.defines(cs.caller)) callees[cs.caller].insert(cs.callee);

    std::map<std::string, CallSequenceSummary> done;
    std::function<void(const std::string&)> visit = [&](const std::string& fn) {
        if (done.count(fn)) return;
        done[fn];  // placeholder guards against accidental cycles
        for (const auto& c : callees[fn]) visit(c);
        done[fn] = summarize_one(m.defs.at(fn), universe, done);
    };
    for (const auto& [fn, _] : m.defs) visit(fn);
    return done;
}

std::vector<Diagnostic> check_call_order(const CModule& m, const isc::ISContract& contract) {
    std::vector<Diagnostic> out;
    auto summaries = summarize_call_sequences(m);
    isc::OrderClosure entry_closure = isc::order_closure(contract.entry_order);

    for (const auto& oc : contract.external_order) {
        for (const auto& entry : contract.entry_points) {
            auto it = summaries.find(entry.name);
            if (it == summaries.end()) continue;
            for (const auto& site : it->second.sites) {
                if (site.callee != oc.after) continue;
                if (site.must_before.count(oc.before)) continue;
                bool guaranteed = false;
                for (const auto& prior : contract.entry_points) {
                    if (prior.name == entry.name) continue;
                    if (!entry_closure.ordered(prior.name, entry.name)) continue;
                    auto ps = summaries.find(prior.name);
                    if (ps != summaries.end() && ps->second.must_call.count(oc.before)) {
                        guaranteed = true;
                        break;
                    }
                }
                if (guaranteed) continue;
                Diagnostic d;
                d.rule_id = "CFR2";
                d.task_id = "T12";
                d.message = "call of '" + oc.after + "' in '" + entry.name +
                            "' is not guaranteed to be preceded by '" + oc.before + "'";
                d.loc = site.loc;
                d.subject = oc.after;
                out.push_back(std::move(d));
            }
        }
    }
    sort_diags(out);
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Oracle

namespace {

using Trace = std::vector<Event>;

struct TraceEnum {
    const CModule& m;
    int max_unroll;
    long max_paths;
    bool exceeded = false;
    std::map<std::string, std::vector<Trace>> memo;

    const std::vector<Trace>& traces_of(const std::string& fn) {
        auto it = memo.find(fn);
        if (it != memo.end()) return it->second;
        std::vector<Trace> traces = enumerate(m.defs.at(fn));
        return memo[fn] = std::move(traces);
    }

    std::vector<Trace> enumerate(const Cfg& cfg) {
        std::vector<Trace> out;
        std::map<std::pair<int, int>, int> edge_count;
        Trace cur;
        dfs(cfg, cfg.entry, edge_count, cur, out);
        return out;
    }

    void dfs(const Cfg& cfg, int b, std::map<std::pair<int, int>, int>& edge_count, Trace& cur,
             std::vector<Trace>& out) {
        if (static_cast<long>(out.size()) >= max_paths) {
            exceeded = true;
            return;
        }
        size_t mark = cur.size();
        bool ok = true;
        for (const auto& ev : cfg.blocks[b].events) {
            if (ev.kind == Event::Call && !ev.via_pointer && m.defines(ev.name)) {
                // inline expansion multiplies this path by the callee's traces
                const auto& subs = traces_of(ev.name);
                if (subs.size() == 1) {
                    cur.insert(cur.end(), subs[0].begin(), subs[0].end());
                } else {
                    for (const auto& sub : subs) {
                        size_t m2 = cur.size();
                        cur.insert(cur.end(), sub.begin(), sub.end());
                        dfs_rest(cfg, b, &ev, edge_count, cur, out);
                        cur.resize(m2);
                    }
                    ok = false;
                    break;
                }
            } else {
                cur.push_back(ev);
            }
        }
        if (ok) {
            if (b == cfg.exit) {
                out.push_back(cur);
            } else {
                follow_succs(cfg, b, edge_count, cur, out);
            }
        }
        cur.resize(mark);
    }

    // resume the events of block b after `from` (used when a callee had
    // multiple traces mid-block)
    void dfs_rest(const Cfg& cfg, int b, const Event* from,
                  std::map<std::pair<int, int>, int>& edge_count, Trace& cur,
                  std::vector<Trace>& out) {
        if (static_cast<long>(out.size()) >= max_paths) {
            exceeded = true;
            return;
        }
        size_t mark = cur.size();
        const auto& evs = cfg.blocks[b].events;
        size_t start = 0;
        while (start < evs.size() && &evs[start] != from) ++start;
        ++start;
        bool ok = true;
        for (size_t i = start; i < evs.size(); ++i) {
            const auto& ev = evs[i];
            if (ev.kind == Event::Call && !ev.via_pointer && m.defines(ev.name)) {
                const auto& subs = traces_of(ev.name);
                if (subs.size() == 1) {
                    cur.insert(cur.end(), subs[0].begin(), subs[0].end());
                } else {
                    for (const auto& sub : subs) {
                        size_t m2 = cur.size();
                        cur.insert(cur.end(), sub.begin(), sub.end());
                        dfs_rest(cfg, b, &ev, edge_count, cur, out);
                        cur.resize(m2);
                    }
                    ok = false;
                    break;
                }
            } else {
                cur.push_back(ev);
            }
        }
        if (ok) {
            if (b == cfg.exit) {
                out.push_back(cur);
            } else {
                follow_succs(cfg, b, edge_count, cur, out);
            }
        }
        cur.resize(mark);
    }

    void follow_succs(const Cfg& cfg, int b, std::map<std::pair<int, int>, int>& edge_count,
                      Trace& cur, std::vector<Trace>& out) {
        for (int s : cfg.blocks[b].succs) {
            std::pair<int, int> e{b, s};
            if (cfg.is_back_edge(b, s)) {
                if (edge_count[e] >= max_unroll) continue;
                ++edge_count[e];
                dfs(cfg, s, edge_count, cur, out);
                --edge_count[e];
            } else {
                dfs(cfg, s, edge_count, cur, out);
            }
        }
    }
};

std::vector<std::string> call_names(const Trace& t) {
    std::vector<std::string> out;
    for (const auto& ev : t)
        if (ev.kind == Event::Call && !ev.via_pointer) out.push_back(ev.name);
    return out;
}

} // namespace

std::vector<std::vector<cfront::Event>> enumerate_event_traces(const CModule& m,
                                                               const std::string& fn,
                                                               int max_unroll, long max_paths,
                                                               bool* exceeded) {
    TraceEnum te{m, max_unroll, max_paths, false, {}};
    std::vector<Trace> out;
    if (m.defines(fn)) out = te.traces_of(fn);
    if (exceeded) *exceeded = te.exceeded;
    return out;
}

std::vector<std::vector<std::string>> admissible_schedules(const isc::ISContract& contract,
                                                           int max_schedule_len) {
    std::vector<std::string> entries;
    for (const auto& e : contract.entry_points) entries.push_back(e.name);
    isc::OrderClosure closure = isc::order_closure(contract.entry_order);

    std::vector<std::vector<std::string>> out;
    std::vector<std::string> cur;
    std::function<void()> rec = [&]() {
        std::set<std::string> present(cur.begin(), cur.end());
        if (present.size() == entries.size()) out.push_back(cur);
        if (static_cast<int>(cur.size()) >= max_schedule_len) return;
        for (const auto& e : entries) {
            if (!present.count(e)) {
                // first activation of e: every entry ordered before e must
                // already have appeared
                bool ok = true;
                for (const auto& p : entries)
                    if (p != e && closure.ordered(p, e) && !present.count(p)) ok = false;
                if (!ok) continue;
            }
            cur.push_back(e);
            rec();
            cur.pop_back();
        }
    };
    rec();
    return out;
}

OracleResult enumerate_oracle(const CModule& m, const isc::ISContract& contract,
                              const OracleBounds& bounds) {
    OracleResult r;
    if (contract.external_order.empty()) return r;

    TraceEnum te{m, bounds.max_unroll, bounds.max_paths, false, {}};
    std::map<std::string, std::vector<std::vector<std::string>>> entry_traces;
    for (const auto& e : contract.entry_points) {
        std::vector<std::vector<std::string>> ts;
        if (m.defines(e.name))
            for (const auto& t : te.traces_of(e.name)) ts.push_back(call_names(t));
        else
            ts.push_back({});  // undefined entry contributes nothing to the trace
        // dedupe: identical call traces are equivalent for the check
        std::sort(ts.begin(), ts.end());
        ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
        entry_traces[e.name] = std::move(ts);
    }
    r.bound_exceeded = te.exceeded;
    if (static_cast<int>(contract.entry_points.size()) > bounds.max_schedule_len)
        r.bound_exceeded = true;

    auto schedules = admissible_schedules(contract, bounds.max_schedule_len);

    auto check_run = [&](const std::vector<std::string>& trace) -> const isc::OrderConstraint* {
        for (const auto& oc : contract.external_order) {
            auto bpos = std::find(trace.begin(), trace.end(), oc.after);
            if (bpos == trace.end()) continue;
            if (std::find(trace.begin(), bpos, oc.before) == bpos) return &oc;
        }
        return nullptr;
    };

    for (const auto& sched : schedules) {
        // cartesian product over per-activation traces
        std::vector<size_t> idx(sched.size(), 0);
        while (true) {
            if (r.runs_checked >= bounds.max_runs) {
                r.bound_exceeded = true;
                return r;
            }
            std::vector<std::string> run;
            for (size_t i = 0; i < sched.size(); ++i) {
                const auto& t = entry_traces[sched[i]][idx[i]];
                run.insert(run.end(), t.begin(), t.end());
            }
            ++r.runs_checked;
            if (const auto* oc = check_run(run)) {
                r.violation_found = true;
                r.violated_before = oc->before;
                r.violated_after = oc->after;
                r.schedule = sched;
                r.trace = run;
                return r;
            }
            // advance mixed-radix counter
            size_t k = 0;
            for (; k < sched.size(); ++k) {
                if (++idx[k] < entry_traces[sched[k]].size()) break;
                idx[k] = 0;
            }
            if (k == sched.size()) break;
        }
    }
    return r;
}

} // namespace modcheck::callorder
