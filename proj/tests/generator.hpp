#pragma once

// Seeded random generator of small C modules plus a matching contract,
// used by the soundness sweeps in the acceptance suite. Output stays inside
// the analyzable subset: static globals, straight-line code, if/else,
// bounded while loops, acyclic local helper calls, external calls.

#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "modcheck/callorder.hpp"
#include "modcheck/dataflow.hpp"
#include "test_util.hpp"

namespace modgen {

struct GenModule {
    std::string contract_text;
    std::string header;
    std::string source;
};

class Generator {
public:
    explicit Generator(uint32_t seed) : rng_(seed) {}

    GenModule next() {
        n_entries_ = 1 + pick(3);
        n_externals_ = 1 + pick(5);
        n_globals_ = pick(5);
        n_helpers_ = pick(3);

        std::ostringstream c;
        c << "module gen {\n  entry_points: {";
        for (int i = 0; i < n_entries_; ++i) c << (i ? ", " : " ") << "void ep" << i << "(void)";
        c << " }\n";
        std::string entry_order = order_pairs(n_entries_, "ep");
        if (!entry_order.empty()) c << "  entry_order: {" << entry_order << " }\n";
        c << "  external_calls: { g: {";
        for (int i = 0; i < n_externals_; ++i)
            c << (i ? ", " : " ") << "void ext" << i << "(void)";
        c << " } }\n";
        std::string ext_order = order_pairs(n_externals_, "ext");
        if (!ext_order.empty()) c << "  external_call_order: {" << ext_order << " }\n";
        c << "}\n";

        std::ostringstream h;
        for (int i = 0; i < n_entries_; ++i) h << "void ep" << i << "(void);\n";

        std::ostringstream s;
        for (int i = 0; i < n_externals_; ++i) s << "void ext" << i << "(void);\n";
        for (int i = 0; i < n_globals_; ++i) {
            s << "static int g" << i;
            if (chance(40)) s << " = " << pick(5);
            s << ";\n";
        }
        // helpers first so callees are declared before use; hi may call hj, j < i
        for (int i = 0; i < n_helpers_; ++i) {
            s << "static void h" << i << "(void) {\n";
            emit_body(s, /*caller_helper=*/i, 1 + pick(3), 2);
            s << "}\n";
        }
        for (int i = 0; i < n_entries_; ++i) {
            s << "void ep" << i << "(void) {\n";
            emit_body(s, n_helpers_, 1 + pick(4), 2);
            s << "}\n";
        }
        return {c.str(), h.str(), s.str()};
    }

private:
    bool chance(int pct) { return static_cast<int>(rng_() % 100) < pct; }
    int pick(int n) { return static_cast<int>(rng_() % n); }

    std::string order_pairs(int n, const char* stem) {
        std::ostringstream o;
        bool first = true;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (chance(30)) {
                    o << (first ? " " : ", ") << stem << i << " < " << stem << j;
                    first = false;
                }
        return o.str();
    }

    // callable_helpers: helpers with index below this may be called
    void emit_body(std::ostringstream& s, int callable_helpers, int n_stmts, int depth) {
        for (int k = 0; k < n_stmts; ++k) {
            switch (pick(6)) {
            case 0:
                if (n_globals_ > 0) {
                    s << "  g" << pick(n_globals_) << " = " << pick(9) << ";\n";
                    break;
                }
                [[fallthrough]];
            case 1:
                s << "  ext" << pick(n_externals_) << "();\n";
                break;
            case 2:
                if (callable_helpers > 0) {
                    s << "  h" << pick(callable_helpers) << "();\n";
                    break;
                }
                [[fallthrough]];
            case 3:
                if (n_globals_ > 0 && depth > 0) {
                    s << "  if (g" << pick(n_globals_) << ") {\n";
                    emit_body(s, callable_helpers, 1 + pick(2), depth - 1);
                    if (chance(40)) {
                        s << "  } else {\n";
                        emit_body(s, callable_helpers, 1 + pick(2), depth - 1);
                    }
                    s << "  }\n";
                    break;
                }
                [[fallthrough]];
            case 4:
                if (n_globals_ > 0 && depth > 0) {
                    s << "  while (g" << pick(n_globals_) << ") {\n";
                    emit_body(s, callable_helpers, 1, depth - 1);
                    s << "  }\n";
                    break;
                }
                [[fallthrough]];
            default:
                if (n_globals_ > 0)
                    s << "  if (g" << pick(n_globals_) << ") { }\n";
                else
                    s << "  ext" << pick(n_externals_) << "();\n";
                break;
            }
        }
    }

    std::mt19937 rng_;
    int n_entries_ = 0, n_externals_ = 0, n_globals_ = 0, n_helpers_ = 0;
};

// Exhaustive bounded oracle for init-before-read: simulates every
// admissible schedule crossed with every per-activation event trace and
// reports whether some run reads a module global before any whole write.
struct InitOracleResult {
    bool violation_found = false;
    bool bound_exceeded = false;
    std::string variable;
};

inline InitOracleResult init_oracle(const modcheck::cfront::CModule& m,
                                    const modcheck::isc::ISContract& c,
                                    const modcheck::callorder::OracleBounds& b = {}) {
    using namespace modcheck;
    InitOracleResult res;

    std::set<std::string> tracked, init0;
    for (const auto& g : m.globals) {
        tracked.insert(g.name);
        if (g.has_initializer) init0.insert(g.name);
    }

    std::map<std::string, std::vector<std::vector<cfront::Event>>> traces;
    for (const auto& ep : c.entry_points) {
        bool exceeded = false;
        traces[ep.name] =
            callorder::enumerate_event_traces(m, ep.name, b.max_unroll, b.max_paths, &exceeded);
        if (exceeded) res.bound_exceeded = true;
        if (traces[ep.name].empty()) traces[ep.name].push_back({});
    }

    long runs = 0;
    for (const auto& sched : callorder::admissible_schedules(c, b.max_schedule_len)) {
        std::vector<size_t> idx(sched.size(), 0);
        while (true) {
            if (++runs > b.max_runs) {
                res.bound_exceeded = true;
                return res;
            }
            std::set<std::string> init = init0;
            for (size_t a = 0; a < sched.size() && !res.violation_found; ++a) {
                for (const auto& ev : traces[sched[a]][idx[a]]) {
                    if (ev.kind == cfront::Event::WriteWhole && tracked.count(ev.name))
                        init.insert(ev.name);
                    else if (ev.kind == cfront::Event::Read && tracked.count(ev.name) &&
                             !init.count(ev.name)) {
                        res.violation_found = true;
                        res.variable = ev.name;
                        break;
                    }
                }
            }
            if (res.violation_found) return res;
            size_t d = 0;
            while (d < idx.size() && ++idx[d] == traces[sched[d]].size()) idx[d++] = 0;
            if (d == idx.size()) break;
        }
    }
    return res;
}

} // namespace modgen
