#include "spalps/stt.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace spalps {

const char* row_kind_name(RowKind k) {
    switch (k) {
        case RowKind::Nil: return "nil";
        case RowKind::Prob: return "prob";
        case RowKind::Go: return "go";
        case RowKind::Tick: return "tick";
        case RowKind::Comm: return "comm";
        case RowKind::Free: return "free";
        case RowKind::Disperse: return "disperse";
    }
    return "?";
}

int resolve_loc_rule(const LocRule& r, int src, const Habitat& h) {
    switch (r.kind) {
        case LocRule::Kind::Same:
            return src;
        case LocRule::Kind::Offset: {
            int m = h.location_count();
            int j = (src + r.offset) % m;
            if (j < 0) j += m;
            return j;
        }
        case LocRule::Kind::Fixed:
            return r.fixed;
        case LocRule::Kind::Scatter:
            throw std::logic_error("scatter rule has no single destination");
    }
    return src;
}

const CommGroup* STT::group_for(const std::string& channel) const {
    for (const auto& g : groups) {
        if (g.channel == channel) return &g;
    }
    return nullptr;
}

Rational comm_yield(const Rational& q, const Rational& X, const Rational& Y) {
    if (X.is_zero()) return Rational(0);
    return rational_min(q, q * Y / X);
}

double comm_yield(double q, double X, double Y) {
    if (X == 0.0) return 0.0;
    return std::min(q, q * Y / X);
}

namespace {

std::vector<SpawnTarget> to_targets(const TermPtr& cont, int species,
                                    const ValidatedModel& m, const StateSpace& space) {
    SpawnMultiset ms = canonicalize(cont, m.defs_for(species));
    std::vector<SpawnTarget> out;
    for (const auto& [term, mult] : ms.entries) {
        int id = space.find(species, term->key());
        if (id < 0) throw std::logic_error("continuation state missing from enumeration");
        out.push_back({id, mult});
    }
    return out;
}

bool is_self_only(const std::vector<SpawnTarget>& ts, int self) {
    return ts.size() == 1 && ts[0].state == self && ts[0].mult == 1;
}

LocRule rule_for_dest(const LocationExpr& dest, const Habitat& h) {
    switch (dest.kind) {
        case LocationExpr::Kind::MyLoc:
            return LocRule::same();
        case LocationExpr::Kind::MyLocOffset:
            return LocRule::shifted(dest.offset);
        case LocationExpr::Kind::Literal: {
            int idx = h.find_location(dest.literal);
            if (idx < 0) throw std::logic_error("unknown destination location in row build");
            return LocRule::at(idx);
        }
        case LocationExpr::Kind::It:
            throw std::logic_error("unsubstituted `it` in row build");
    }
    return LocRule::same();
}

}  // namespace

STT build_stt(const ValidatedModel& m, const StateSpace& space) {
    STT stt;
    stt.rows.resize(space.size());
    std::map<std::string, CommGroup> groups;

    for (int k = 0; k < space.size(); ++k) {
        const CanonicalState& st = space[k];
        RowSpec row;
        row.state = k;
        const TermPtr& t = st.term;
        switch (t->kind) {
            case ProcessTerm::Kind::Nil:
                row.kind = RowKind::Nil;
                row.cont = {{k, 1}};
                break;
            case ProcessTerm::Kind::Prefix: {
                switch (t->act.kind) {
                    case ActionKind::Tick:
                        row.kind = RowKind::Tick;
                        row.cont = to_targets(t->next, st.species, m, space);
                        break;
                    case ActionKind::Go:
                        row.kind = RowKind::Go;
                        row.where = rule_for_dest(t->act.dest, m.habitat);
                        row.cont = to_targets(t->next, st.species, m, space);
                        break;
                    default: {
                        if (m.is_restricted(t->act.channel)) {
                            // Blocking prefix: joins the channel's match pool;
                            // the unmatched remainder keeps waiting.
                            row.kind = RowKind::Comm;
                            row.channel = t->act.channel;
                            row.is_output = t->act.kind == ActionKind::Output;
                            row.then_cont = to_targets(t->next, st.species, m, space);
                            row.else_cont = {{k, 1}};
                            row.else_self = true;
                        } else {
                            row.kind = RowKind::Free;
                            row.cont = to_targets(t->next, st.species, m, space);
                        }
                        break;
                    }
                }
                break;
            }
            case ProcessTerm::Kind::ProbChoice: {
                row.kind = RowKind::Prob;
                for (const auto& [pexpr, body] : t->branches) {
                    ProbBranch b;
                    b.prob = pexpr.value(m.params);
                    b.prob_text = pexpr.text();
                    b.targets = to_targets(body, st.species, m, space);
                    row.branches.push_back(std::move(b));
                }
                break;
            }
            case ProcessTerm::Kind::NeighborChoice:
                row.kind = RowKind::Disperse;
                row.where = LocRule::scatter();
                row.cont = to_targets(t->body->next, st.species, m, space);
                break;
            case ProcessTerm::Kind::CondComm:
                row.kind = RowKind::Comm;
                row.channel = t->gamma.channel;
                row.is_output = t->gamma.kind == ActionKind::Output;
                row.then_cont = to_targets(t->then_branch, st.species, m, space);
                row.else_cont = to_targets(t->else_branch, st.species, m, space);
                row.else_self = is_self_only(row.else_cont, k);
                break;
            default:
                throw std::logic_error("non-canonical state in row build");
        }
        if (row.kind == RowKind::Comm) {
            CommGroup& g = groups[row.channel];
            g.channel = row.channel;
            (row.is_output ? g.outputs : g.inputs).push_back(k);
        }
        stt.rows[k] = std::move(row);
    }
    for (auto& [ch, g] : groups) {
        (void)ch;
        stt.groups.push_back(std::move(g));
    }
    return stt;
}

std::vector<std::string> row_mass_check(const STT& stt, const StateSpace& space) {
    std::vector<std::string> problems;
    auto bad = [&](int k, const std::string& msg) {
        problems.push_back("state " + space[k].display + ": " + msg);
    };
    auto check_targets = [&](int k, const std::vector<SpawnTarget>& ts, const char* label) {
        if (ts.empty()) {
            bad(k, std::string(label) + " has no targets");
            return;
        }
        for (const auto& t : ts) {
            if (t.state < 0 || t.state >= space.size()) bad(k, std::string(label) + " target out of range");
            if (t.mult < 1) bad(k, std::string(label) + " multiplicity below one");
        }
    };
    if (static_cast<int>(stt.rows.size()) != space.size()) {
        problems.push_back("row count differs from state count");
        return problems;
    }
    for (int k = 0; k < space.size(); ++k) {
        const RowSpec& row = stt.rows[k];
        if (row.state != k) bad(k, "row index mismatch");
        switch (row.kind) {
            case RowKind::Nil:
                if (!is_self_only(row.cont, k)) bad(k, "terminated row must keep its population");
                break;
            case RowKind::Tick:
            case RowKind::Free:
                if (row.where.kind != LocRule::Kind::Same) bad(k, "row must act in place");
                check_targets(k, row.cont, "continuation");
                break;
            case RowKind::Go:
                if (row.where.kind == LocRule::Kind::Scatter) bad(k, "go row cannot scatter");
                check_targets(k, row.cont, "continuation");
                break;
            case RowKind::Disperse:
                if (row.where.kind != LocRule::Kind::Scatter) bad(k, "disperse row must scatter");
                check_targets(k, row.cont, "continuation");
                break;
            case RowKind::Prob: {
                if (row.branches.empty()) {
                    bad(k, "probabilistic row has no branches");
                    break;
                }
                Rational sum(0);
                for (const auto& b : row.branches) {
                    if (!(b.prob > Rational(0)) || b.prob > Rational(1)) {
                        bad(k, "branch probability " + b.prob.str() + " outside (0, 1]");
                    }
                    sum += b.prob;
                    check_targets(k, b.targets, "branch");
                }
                if (!sum.is_one()) bad(k, "branch probabilities sum to " + sum.str() + ", not 1");
                break;
            }
            case RowKind::Comm: {
                if (row.channel.empty()) bad(k, "communication row lacks a channel");
                check_targets(k, row.then_cont, "matched continuation");
                check_targets(k, row.else_cont, "unmatched continuation");
                if (row.else_self && !is_self_only(row.else_cont, k)) {
                    bad(k, "self-waiting row routes its remainder elsewhere");
                }
                const CommGroup* g = stt.group_for(row.channel);
                if (g == nullptr) {
                    bad(k, "communication row missing from channel group");
                } else {
                    const auto& side = row.is_output ? g->outputs : g->inputs;
                    if (std::find(side.begin(), side.end(), k) == side.end()) {
                        bad(k, "communication row missing from its direction pool");
                    }
                }
                break;
            }
        }
    }
    return problems;
}

// ---------------------------------------------------------------------------
// Dense symbolic table

namespace {

void accumulate(ExprPtr& cell, ExprPtr e) {
    cell = cell ? SymbolicExpr::add({cell, std::move(e)}) : std::move(e);
}

ExprPtr scaled_var(int state, int loc, const Rational& coeff) {
    ExprPtr v = SymbolicExpr::var(state, loc);
    if (coeff.is_one()) return v;
    return SymbolicExpr::mul({SymbolicExpr::constant(coeff), v});
}

ExprPtr pool_sum(const std::vector<int>& members, int loc) {
    std::vector<ExprPtr> vars;
    for (int s : members) vars.push_back(SymbolicExpr::var(s, loc));
    return SymbolicExpr::add(std::move(vars));
}

}  // namespace

DenseSTT materialize(const STT& stt, const StateSpace& space, const Habitat& h) {
    DenseSTT dense;
    dense.states = space.size();
    dense.locations = h.location_count();
    dense.cells.assign(static_cast<size_t>(dense.states) * dense.states * dense.locations,
                       nullptr);
    int m = dense.locations;

    for (int k = 0; k < space.size(); ++k) {
        const RowSpec& row = stt.rows[k];
        switch (row.kind) {
            case RowKind::Nil:
            case RowKind::Tick:
            case RowKind::Free:
                for (int l = 0; l < m; ++l) {
                    for (const auto& t : row.cont) {
                        accumulate(dense.at(k, t.state, l),
                                   scaled_var(k, l, Rational(t.mult)));
                    }
                }
                break;
            case RowKind::Go:
                for (int l = 0; l < m; ++l) {
                    int dst = resolve_loc_rule(row.where, l, h);
                    for (const auto& t : row.cont) {
                        accumulate(dense.at(k, t.state, dst),
                                   scaled_var(k, l, Rational(t.mult)));
                    }
                }
                break;
            case RowKind::Prob:
                for (int l = 0; l < m; ++l) {
                    for (const auto& b : row.branches) {
                        for (const auto& t : b.targets) {
                            accumulate(dense.at(k, t.state, l),
                                       scaled_var(k, l, b.prob * Rational(t.mult)));
                        }
                    }
                }
                break;
            case RowKind::Disperse:
                for (int l = 0; l < m; ++l) {
                    if (h.neighbors(l).empty()) {
                        // Stranded at an isolated node: nowhere to move.
                        accumulate(dense.at(k, k, l), SymbolicExpr::var(k, l));
                        continue;
                    }
                    ExprPtr gathered = SymbolicExpr::neighbor_sum(k, l);
                    for (const auto& t : row.cont) {
                        ExprPtr e = t.mult == 1
                                        ? gathered
                                        : SymbolicExpr::mul(
                                              {SymbolicExpr::constant(Rational(t.mult)),
                                               gathered});
                        accumulate(dense.at(k, t.state, l), std::move(e));
                    }
                }
                break;
            case RowKind::Comm: {
                const CommGroup* g = stt.group_for(row.channel);
                const auto& same_side = row.is_output ? g->outputs : g->inputs;
                const auto& other_side = row.is_output ? g->inputs : g->outputs;
                for (int l = 0; l < m; ++l) {
                    ExprPtr q = SymbolicExpr::var(k, l);
                    ExprPtr X = pool_sum(same_side, l);
                    ExprPtr Y = pool_sum(other_side, l);
                    ExprPtr matched = SymbolicExpr::min2(
                        q, SymbolicExpr::div(SymbolicExpr::mul({q, Y}), X));
                    ExprPtr shortfall = SymbolicExpr::sub(q, matched);
                    for (const auto& t : row.then_cont) {
                        ExprPtr e = t.mult == 1
                                        ? matched
                                        : SymbolicExpr::mul(
                                              {SymbolicExpr::constant(Rational(t.mult)),
                                               matched});
                        accumulate(dense.at(k, t.state, l), std::move(e));
                    }
                    for (const auto& t : row.else_cont) {
                        ExprPtr e = t.mult == 1
                                        ? shortfall
                                        : SymbolicExpr::mul(
                                              {SymbolicExpr::constant(Rational(t.mult)),
                                               shortfall});
                        accumulate(dense.at(k, t.state, l), std::move(e));
                    }
                }
                break;
            }
        }
    }
    for (auto& cell : dense.cells) {
        if (cell) cell = normalize(cell);
    }
    return dense;
}

// ---------------------------------------------------------------------------
// Text emitter

namespace {

std::string targets_text(const std::vector<SpawnTarget>& ts, const StateSpace& space) {
    std::string out;
    for (size_t i = 0; i < ts.size(); ++i) {
        if (i) out += " + ";
        out += space[ts[i].state].display;
        if (ts[i].mult > 1) out += " x" + std::to_string(ts[i].mult);
    }
    return out;
}

std::string where_text(const LocRule& r, const Habitat& h) {
    switch (r.kind) {
        case LocRule::Kind::Same:
            return "here";
        case LocRule::Kind::Offset:
            return r.offset >= 0 ? "(l+" + std::to_string(r.offset) + ")"
                                 : "(l-" + std::to_string(-r.offset) + ")";
        case LocRule::Kind::Fixed:
            return "loc " + h.location_name(r.fixed);
        case LocRule::Kind::Scatter:
            return "each l' in Nb(l)";
    }
    return "?";
}

}  // namespace

std::string stt_text(const STT& stt, const StateSpace& space, const Habitat& h) {
    std::string out;
    for (int k = 0; k < space.size(); ++k) {
        const RowSpec& row = stt.rows[k];
        out += "S" + std::to_string(k + 1) + ": " + space[k].display + " [";
        if (row.kind == RowKind::Comm) {
            out += std::string("comm ") + (row.is_output ? "out " : "in ") + row.channel;
        } else if (row.kind == RowKind::Free) {
            const Action& a = space[k].action;
            out += std::string("free ") + (a.kind == ActionKind::Output ? "out " : "in ") +
                   a.channel;
        } else {
            out += row_kind_name(row.kind);
        }
        out += "]\n";
        switch (row.kind) {
            case RowKind::Nil:
            case RowKind::Tick:
            case RowKind::Free:
            case RowKind::Go:
                out += "  -> " + targets_text(row.cont, space) + " @ " +
                       where_text(row.where, h) + "\n";
                break;
            case RowKind::Disperse:
                out += "  1/deg(l) -> " + targets_text(row.cont, space) + " @ " +
                       where_text(row.where, h) + "\n";
                break;
            case RowKind::Prob:
                for (const auto& b : row.branches) {
                    out += "  " + b.prob.str();
                    if (b.prob_text != b.prob.str()) out += " (" + b.prob_text + ")";
                    out += " -> " + targets_text(b.targets, space) + " @ here\n";
                }
                break;
            case RowKind::Comm:
                out += "  matched -> " + targets_text(row.then_cont, space) + " @ here\n";
                out += "  unmatched -> " + targets_text(row.else_cont, space) + " @ here\n";
                break;
        }
    }
    return out;
}

}  // namespace spalps
