#include "spalps/meanfield.hpp"

#include <algorithm>
#include <map>

namespace spalps {

const char* phase_name(Phase p) {
    switch (p) {
        case Phase::Init: return "init";
        case Phase::Prob: return "prob";
        case Phase::Action: return "action";
        case Phase::Tick: return "tick";
        case Phase::Dead: return "dead";
        case Phase::Stalled: return "stalled";
    }
    return "?";
}

namespace {

bool fires_in(RowKind k, Phase p) {
    switch (p) {
        case Phase::Prob:
            return k == RowKind::Prob || k == RowKind::Disperse;
        case Phase::Action:
            return k == RowKind::Go || k == RowKind::Free || k == RowKind::Comm;
        case Phase::Tick:
            return k == RowKind::Tick;
        default:
            return false;
    }
}

}  // namespace

Phase classify_phase(const STT& stt, const std::vector<char>& populated) {
    bool any_prob = false, any_action = false, any_tick = false;
    for (size_t k = 0; k < stt.rows.size(); ++k) {
        if (!populated[k]) continue;
        switch (stt.rows[k].kind) {
            case RowKind::Prob:
            case RowKind::Disperse:
                any_prob = true;
                break;
            case RowKind::Go:
            case RowKind::Free:
            case RowKind::Comm:
                any_action = true;
                break;
            case RowKind::Tick:
                any_tick = true;
                break;
            case RowKind::Nil:
                break;
        }
    }
    if (any_prob) return Phase::Prob;
    if (any_action) return Phase::Action;
    if (any_tick) return Phase::Tick;
    return Phase::Dead;
}

bool phase_cannot_progress(const STT& stt, Phase p, const std::vector<double>& cells,
                           int states, const Habitat& h) {
    int locations = h.location_count();
    auto at = [&](int k, int l) { return cells[static_cast<size_t>(k) * locations + l]; };
    auto populated_anywhere = [&](int k) {
        for (int l = 0; l < locations; ++l) {
            if (at(k, l) > 0.0) return true;
        }
        return false;
    };
    auto self_only = [&](const std::vector<SpawnTarget>& ts, int k) {
        return ts.size() == 1 && ts[0].state == k && ts[0].mult == 1;
    };

    if (p == Phase::Prob) {
        for (int k = 0; k < states; ++k) {
            const RowSpec& row = stt.rows[k];
            if (row.kind == RowKind::Prob && populated_anywhere(k)) {
                for (const auto& b : row.branches) {
                    if (!self_only(b.targets, k)) return false;
                }
            }
            if (row.kind == RowKind::Disperse) {
                // Moving to a neighbor always changes the frame; individuals
                // stranded at isolated nodes cannot move.
                for (int l = 0; l < locations; ++l) {
                    if (at(k, l) > 0.0 && !h.neighbors(l).empty()) return false;
                }
            }
        }
        return true;
    }
    if (p == Phase::Action) {
        for (int k = 0; k < states; ++k) {
            const RowSpec& row = stt.rows[k];
            if (!populated_anywhere(k)) continue;
            if (row.kind == RowKind::Free) {
                if (!self_only(row.cont, k)) return false;
            } else if (row.kind == RowKind::Go) {
                if (!self_only(row.cont, k)) return false;
                if (row.where.kind == LocRule::Kind::Offset && row.where.offset != 0) return false;
                if (row.where.kind == LocRule::Kind::Fixed) {
                    for (int l = 0; l < locations; ++l) {
                        if (l != row.where.fixed && at(k, l) > 0.0) return false;
                    }
                }
            }
        }
        for (const auto& g : stt.groups) {
            for (int l = 0; l < locations; ++l) {
                double xin = 0, xout = 0;
                for (int k : g.inputs) xin += at(k, l);
                for (int k : g.outputs) xout += at(k, l);
                if (xin > 0.0 && xout > 0.0) {
                    // Matches will move mass unless both outcomes are self-loops
                    // on every populated participant.
                    for (int k : g.inputs) {
                        if (at(k, l) > 0.0 &&
                            (!self_only(stt.rows[k].then_cont, k) ||
                             !self_only(stt.rows[k].else_cont, k)))
                            return false;
                    }
                    for (int k : g.outputs) {
                        if (at(k, l) > 0.0 &&
                            (!self_only(stt.rows[k].then_cont, k) ||
                             !self_only(stt.rows[k].else_cont, k)))
                            return false;
                    }
                } else {
                    // No partner: everything routes through the else branch.
                    for (int k : g.inputs) {
                        if (at(k, l) > 0.0 && !self_only(stt.rows[k].else_cont, k)) return false;
                    }
                    for (int k : g.outputs) {
                        if (at(k, l) > 0.0 && !self_only(stt.rows[k].else_cont, k)) return false;
                    }
                }
            }
        }
        return true;
    }
    return false;
}

Compiled compile_model(const ValidatedModel& m) {
    Compiled c;
    c.model = m;
    c.space = enumerate_states(m);
    c.init = build_init_matrix(m, c.space);
    c.stt = build_stt(m, c.space);
    auto problems = row_mass_check(c.stt, c.space);
    if (!problems.empty()) {
        throw std::logic_error("transition table failed its mass check: " + problems.front());
    }
    return c;
}

namespace {

struct Pools {
    // group index -> locations doubles
    std::vector<std::vector<double>> in_pool, out_pool;
};

Pools build_pools(const STT& stt, const std::vector<double>& cells, int locations) {
    Pools p;
    p.in_pool.resize(stt.groups.size());
    p.out_pool.resize(stt.groups.size());
    for (size_t gi = 0; gi < stt.groups.size(); ++gi) {
        p.in_pool[gi].assign(locations, 0.0);
        p.out_pool[gi].assign(locations, 0.0);
        for (int k : stt.groups[gi].inputs) {
            for (int l = 0; l < locations; ++l) {
                p.in_pool[gi][l] += cells[static_cast<size_t>(k) * locations + l];
            }
        }
        for (int k : stt.groups[gi].outputs) {
            for (int l = 0; l < locations; ++l) {
                p.out_pool[gi][l] += cells[static_cast<size_t>(k) * locations + l];
            }
        }
    }
    return p;
}

int group_index(const STT& stt, const std::string& channel) {
    for (size_t gi = 0; gi < stt.groups.size(); ++gi) {
        if (stt.groups[gi].channel == channel) return static_cast<int>(gi);
    }
    return -1;
}

std::vector<double> apply_step(const Compiled& c, const std::vector<double>& cur, Phase p) {
    const STT& stt = c.stt;
    const Habitat& h = c.model.habitat;
    int n = c.space.size();
    int m = h.location_count();
    std::vector<double> next(cur.size(), 0.0);
    auto get = [&](int k, int l) { return cur[static_cast<size_t>(k) * m + l]; };
    auto put = [&](int k, int l, double v) { next[static_cast<size_t>(k) * m + l] += v; };

    Pools pools;
    if (p == Phase::Action && !stt.groups.empty()) pools = build_pools(stt, cur, m);

    for (int k = 0; k < n; ++k) {
        const RowSpec& row = stt.rows[k];
        if (!fires_in(row.kind, p)) {
            for (int l = 0; l < m; ++l) {
                double q = get(k, l);
                if (q != 0.0) put(k, l, q);
            }
            continue;
        }
        switch (row.kind) {
            case RowKind::Prob:
                for (int l = 0; l < m; ++l) {
                    double q = get(k, l);
                    if (q == 0.0) continue;
                    for (const auto& b : row.branches) {
                        double share = q * b.prob.to_double();
                        for (const auto& t : b.targets) put(t.state, l, share * t.mult);
                    }
                }
                break;
            case RowKind::Disperse:
                for (int l = 0; l < m; ++l) {
                    double q = get(k, l);
                    if (q == 0.0) continue;
                    const auto& nb = h.neighbors(l);
                    if (nb.empty()) {
                        put(k, l, q);  // stranded at an isolated node
                        continue;
                    }
                    double share = q / static_cast<double>(nb.size());
                    for (int dst : nb) {
                        for (const auto& t : row.cont) put(t.state, dst, share * t.mult);
                    }
                }
                break;
            case RowKind::Go:
                for (int l = 0; l < m; ++l) {
                    double q = get(k, l);
                    if (q == 0.0) continue;
                    int dst = resolve_loc_rule(row.where, l, h);
                    for (const auto& t : row.cont) put(t.state, dst, q * t.mult);
                }
                break;
            case RowKind::Free:
            case RowKind::Tick:
                for (int l = 0; l < m; ++l) {
                    double q = get(k, l);
                    if (q == 0.0) continue;
                    for (const auto& t : row.cont) put(t.state, l, q * t.mult);
                }
                break;
            case RowKind::Comm: {
                int gi = group_index(stt, row.channel);
                const auto& same = row.is_output ? pools.out_pool[gi] : pools.in_pool[gi];
                const auto& other = row.is_output ? pools.in_pool[gi] : pools.out_pool[gi];
                for (int l = 0; l < m; ++l) {
                    double q = get(k, l);
                    if (q == 0.0) continue;
                    double matched = comm_yield(q, same[l], other[l]);
                    double shortfall = q - matched;
                    if (matched != 0.0) {
                        for (const auto& t : row.then_cont) put(t.state, l, matched * t.mult);
                    }
                    if (shortfall != 0.0) {
                        for (const auto& t : row.else_cont) put(t.state, l, shortfall * t.mult);
                    }
                }
                break;
            }
            case RowKind::Nil:
                break;  // unreachable: Nil fires in no phase
        }
    }
    return next;
}

}  // namespace

Trajectory evaluate(const Compiled& c, int steps) {
    int n = c.space.size();
    int m = c.model.habitat.location_count();
    Trajectory traj;
    traj.states = n;
    traj.locations = m;

    Frame f0;
    f0.phase = Phase::Init;
    f0.cells.assign(c.init.cells.begin(), c.init.cells.end());
    traj.frames.push_back(std::move(f0));

    std::vector<char> populated(n);
    for (int step = 1; step <= steps; ++step) {
        const Frame& cur = traj.frames.back();
        for (int k = 0; k < n; ++k) {
            populated[k] = 0;
            for (int l = 0; l < m; ++l) {
                if (cur.at(k, l, m) > 0.0) {
                    populated[k] = 1;
                    break;
                }
            }
        }
        Phase p = classify_phase(c.stt, populated);
        if ((p == Phase::Prob || p == Phase::Action) &&
            phase_cannot_progress(c.stt, p, cur.cells, n, c.model.habitat)) {
            Frame stalled;
            stalled.phase = Phase::Stalled;
            stalled.cells = cur.cells;
            traj.frames.push_back(std::move(stalled));
            traj.stalled = true;
            break;
        }
        Frame next;
        next.phase = p;
        if (p == Phase::Dead) {
            next.cells = cur.cells;
        } else {
            next.cells = apply_step(c, cur.cells, p);
        }
        traj.frames.push_back(std::move(next));
    }
    return traj;
}

Trajectory collapse_ticks(const Trajectory& t) {
    Trajectory out;
    out.states = t.states;
    out.locations = t.locations;
    out.stalled = t.stalled;
    for (const Frame& f : t.frames) {
        if (f.phase == Phase::Init || f.phase == Phase::Tick) out.frames.push_back(f);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Recurrence system

std::vector<double> EquationSystem::iterate(const std::vector<double>& prev,
                                            const Habitat& h) const {
    std::vector<double> next(prev.size(), 0.0);
    Occupancy occ = [&](int s, int l) { return prev[static_cast<size_t>(s) * locations + l]; };
    for (int i = 0; i < states; ++i) {
        for (int l = 0; l < locations; ++l) {
            const ExprPtr& e = at(i, l);
            next[static_cast<size_t>(i) * locations + l] = e ? eval_expr(e, occ, h) : 0.0;
        }
    }
    return next;
}

EquationSystem derive_equations(const DenseSTT& dense, const Habitat& h) {
    (void)h;
    EquationSystem eq;
    eq.states = dense.states;
    eq.locations = dense.locations;
    eq.rhs.assign(static_cast<size_t>(eq.states) * eq.locations, nullptr);
    for (int i = 0; i < eq.states; ++i) {
        for (int l = 0; l < eq.locations; ++l) {
            std::vector<ExprPtr> terms;
            for (int k = 0; k < eq.states; ++k) {
                const ExprPtr& cell = dense.at(k, i, l);
                if (cell) terms.push_back(cell);
            }
            eq.rhs[static_cast<size_t>(i) * eq.locations + l] =
                normalize(SymbolicExpr::add(std::move(terms)));
        }
    }
    return eq;
}

// ---------------------------------------------------------------------------
// Recurrence text

namespace {

std::string coeff_prefix(const Rational& c) {
    return c.is_one() ? std::string() : c.str() + " * ";
}

std::string occ_ref(const StateSpace& space, int state, const std::string& where) {
    return space[state].display + "(t-1)@" + where;
}

std::string offset_where(int delta) {
    // Gather form: the target at l collects from sources at l - delta.
    if (delta == 0) return "l";
    if (delta > 0) return "(l-" + std::to_string(delta) + ")";
    return "(l+" + std::to_string(-delta) + ")";
}

std::string pool_text(const StateSpace& space, const std::vector<int>& members) {
    std::string out;
    for (size_t i = 0; i < members.size(); ++i) {
        if (i) out += " + ";
        out += occ_ref(space, members[i], "l");
    }
    if (members.size() > 1) return "(" + out + ")";
    return out;
}

}  // namespace

std::string equations_text(const Compiled& c) {
    const StateSpace& space = c.space;
    const STT& stt = c.stt;
    const Habitat& h = c.model.habitat;
    int n = space.size();

    std::vector<std::vector<std::string>> terms(n);
    std::vector<char> needs_per_loc(n, 0);

    for (int k = 0; k < n; ++k) {
        const RowSpec& row = stt.rows[k];
        switch (row.kind) {
            case RowKind::Nil:
                terms[k].push_back(occ_ref(space, k, "l"));
                break;
            case RowKind::Tick:
            case RowKind::Free:
                for (const auto& t : row.cont) {
                    terms[t.state].push_back(coeff_prefix(Rational(t.mult)) +
                                             occ_ref(space, k, "l"));
                }
                break;
            case RowKind::Go:
                if (row.where.kind == LocRule::Kind::Fixed) {
                    for (const auto& t : row.cont) needs_per_loc[t.state] = 1;
                } else {
                    std::string where = row.where.kind == LocRule::Kind::Same
                                            ? "l"
                                            : offset_where(row.where.offset);
                    for (const auto& t : row.cont) {
                        terms[t.state].push_back(coeff_prefix(Rational(t.mult)) +
                                                 occ_ref(space, k, where));
                    }
                }
                break;
            case RowKind::Prob: {
                std::map<int, Rational> coeff;
                for (const auto& b : row.branches) {
                    for (const auto& t : b.targets) {
                        auto [it, inserted] = coeff.emplace(t.state, b.prob * Rational(t.mult));
                        if (!inserted) it->second += b.prob * Rational(t.mult);
                    }
                }
                for (const auto& [tgt, cf] : coeff) {
                    terms[tgt].push_back(coeff_prefix(cf) + occ_ref(space, k, "l"));
                }
                break;
            }
            case RowKind::Disperse:
                for (const auto& t : row.cont) {
                    terms[t.state].push_back(coeff_prefix(Rational(t.mult)) + "sum{l' in Nb(l)} " +
                                             space[k].display + "(t-1)@l' / deg(l')");
                }
                break;
            case RowKind::Comm: {
                const CommGroup* g = stt.group_for(row.channel);
                const auto& same = row.is_output ? g->outputs : g->inputs;
                const auto& other = row.is_output ? g->inputs : g->outputs;
                std::string q = occ_ref(space, k, "l");
                std::string matched =
                    "min(" + q + ", " + q + " * " + pool_text(space, other) + " / " +
                    pool_text(space, same) + ")";
                for (const auto& t : row.then_cont) {
                    terms[t.state].push_back(coeff_prefix(Rational(t.mult)) + matched);
                }
                for (const auto& t : row.else_cont) {
                    terms[t.state].push_back(coeff_prefix(Rational(t.mult)) + "(" + q + " - " +
                                             matched + ")");
                }
                break;
            }
        }
    }

    DenseSTT dense;
    EquationSystem eq;
    bool any_per_loc = false;
    for (int i = 0; i < n; ++i) any_per_loc = any_per_loc || needs_per_loc[i];
    if (any_per_loc) {
        dense = materialize(stt, space, h);
        eq = derive_equations(dense, h);
    }

    std::string out;
    StateNamer sn = [&](int s) { return space[s].display; };
    LocNamer ln = [&](int l) { return h.location_name(l); };
    for (int i = 0; i < n; ++i) {
        if (needs_per_loc[i]) {
            for (int l = 0; l < h.location_count(); ++l) {
                out += space[i].display + "(t)@" + h.location_name(l) + " = " +
                       expr_text(eq.at(i, l), sn, ln) + "\n";
            }
            continue;
        }
        out += space[i].display + "(t)@l = ";
        if (terms[i].empty()) {
            out += "0";
        } else {
            for (size_t j = 0; j < terms[i].size(); ++j) {
                if (j) out += " + ";
                out += terms[i][j];
            }
        }
        out += "\n";
    }

    out += "\ninitial:\n";
    for (int i = 0; i < n; ++i) {
        for (int l = 0; l < h.location_count(); ++l) {
            std::int64_t v = c.init.at(i, l);
            if (v != 0) {
                out += space[i].display + "(0)@" + h.location_name(l) + " = " +
                       std::to_string(v) + "\n";
            }
        }
    }
    return out;
}

}  // namespace spalps
