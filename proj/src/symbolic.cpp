#include "spalps/symbolic.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <utility>

namespace spalps {

namespace {

ExprPtr make(SymbolicExpr&& e) { return std::make_shared<const SymbolicExpr>(std::move(e)); }

}  // namespace

ExprPtr SymbolicExpr::constant(Rational v) {
    if (v < Rational(0)) throw std::logic_error("negative symbolic constant");
    SymbolicExpr e;
    e.op = Op::Const;
    e.value = std::move(v);
    return make(std::move(e));
}

ExprPtr SymbolicExpr::var(int state, int loc) {
    SymbolicExpr e;
    e.op = Op::Var;
    e.state = state;
    e.loc = loc;
    return make(std::move(e));
}

ExprPtr SymbolicExpr::add(std::vector<ExprPtr> terms) {
    if (terms.empty()) return constant(Rational(0));
    if (terms.size() == 1) return terms[0];
    SymbolicExpr e;
    e.op = Op::Add;
    e.args = std::move(terms);
    return make(std::move(e));
}

ExprPtr SymbolicExpr::sub(ExprPtr a, ExprPtr b) {
    SymbolicExpr e;
    e.op = Op::Sub;
    e.args = {std::move(a), std::move(b)};
    return make(std::move(e));
}

ExprPtr SymbolicExpr::mul(std::vector<ExprPtr> factors) {
    if (factors.empty()) return constant(Rational(1));
    if (factors.size() == 1) return factors[0];
    SymbolicExpr e;
    e.op = Op::Mul;
    e.args = std::move(factors);
    return make(std::move(e));
}

ExprPtr SymbolicExpr::div(ExprPtr num, ExprPtr den) {
    SymbolicExpr e;
    e.op = Op::Div;
    e.args = {std::move(num), std::move(den)};
    return make(std::move(e));
}

ExprPtr SymbolicExpr::min2(ExprPtr a, ExprPtr b) {
    SymbolicExpr e;
    e.op = Op::Min;
    e.args = {std::move(a), std::move(b)};
    return make(std::move(e));
}

ExprPtr SymbolicExpr::neighbor_sum(int state, int center_loc) {
    SymbolicExpr e;
    e.op = Op::NeighborSum;
    e.state = state;
    e.loc = center_loc;
    return make(std::move(e));
}

std::string SymbolicExpr::key() const {
    switch (op) {
        case Op::Const:
            return "c:" + value.str();
        case Op::Var:
            return "v:" + std::to_string(state) + "@" + std::to_string(loc);
        case Op::NeighborSum:
            return "nb:" + std::to_string(state) + "@" + std::to_string(loc);
        default: {
            const char* tag = op == Op::Add   ? "+"
                              : op == Op::Sub ? "-"
                              : op == Op::Mul ? "*"
                              : op == Op::Div ? "/"
                                              : "min";
            std::string out(tag);
            out += "(";
            for (size_t i = 0; i < args.size(); ++i) {
                if (i) out += ",";
                out += args[i]->key();
            }
            out += ")";
            return out;
        }
    }
}

double eval_expr(const ExprPtr& e, const Occupancy& prev, const Habitat& h) {
    switch (e->op) {
        case SymbolicExpr::Op::Const:
            return e->value.to_double();
        case SymbolicExpr::Op::Var:
            return prev(e->state, e->loc);
        case SymbolicExpr::Op::Add: {
            double s = 0;
            for (const auto& a : e->args) s += eval_expr(a, prev, h);
            return s;
        }
        case SymbolicExpr::Op::Sub:
            return eval_expr(e->args[0], prev, h) - eval_expr(e->args[1], prev, h);
        case SymbolicExpr::Op::Mul: {
            double p = 1;
            for (const auto& a : e->args) p *= eval_expr(a, prev, h);
            return p;
        }
        case SymbolicExpr::Op::Div: {
            double den = eval_expr(e->args[1], prev, h);
            if (den == 0.0) return 0.0;
            return eval_expr(e->args[0], prev, h) / den;
        }
        case SymbolicExpr::Op::Min:
            return std::min(eval_expr(e->args[0], prev, h), eval_expr(e->args[1], prev, h));
        case SymbolicExpr::Op::NeighborSum: {
            double s = 0;
            for (int nb : h.neighbors(e->loc)) {
                size_t deg = h.neighbors(nb).size();
                if (deg == 0) continue;
                s += prev(e->state, nb) / static_cast<double>(deg);
            }
            return s;
        }
    }
    return 0.0;
}

Rational eval_expr_exact(const ExprPtr& e,
                         const std::function<Rational(int, int)>& prev,
                         const Habitat& h) {
    switch (e->op) {
        case SymbolicExpr::Op::Const:
            return e->value;
        case SymbolicExpr::Op::Var:
            return prev(e->state, e->loc);
        case SymbolicExpr::Op::Add: {
            Rational s(0);
            for (const auto& a : e->args) s += eval_expr_exact(a, prev, h);
            return s;
        }
        case SymbolicExpr::Op::Sub:
            return eval_expr_exact(e->args[0], prev, h) - eval_expr_exact(e->args[1], prev, h);
        case SymbolicExpr::Op::Mul: {
            Rational p(1);
            for (const auto& a : e->args) p *= eval_expr_exact(a, prev, h);
            return p;
        }
        case SymbolicExpr::Op::Div: {
            Rational den = eval_expr_exact(e->args[1], prev, h);
            if (den.is_zero()) return Rational(0);
            return eval_expr_exact(e->args[0], prev, h) / den;
        }
        case SymbolicExpr::Op::Min:
            return rational_min(eval_expr_exact(e->args[0], prev, h),
                                eval_expr_exact(e->args[1], prev, h));
        case SymbolicExpr::Op::NeighborSum: {
            Rational s(0);
            for (int nb : h.neighbors(e->loc)) {
                size_t deg = h.neighbors(nb).size();
                if (deg == 0) continue;
                s += prev(e->state, nb) / Rational(static_cast<std::int64_t>(deg));
            }
            return s;
        }
    }
    return Rational(0);
}

// ---------------------------------------------------------------------------
// Normalization

namespace {

struct LinTerm {
    Rational coeff;
    std::vector<ExprPtr> atoms;  // sorted by key
    std::string akey;
};

void finish_term(LinTerm& t) {
    std::sort(t.atoms.begin(), t.atoms.end(),
              [](const ExprPtr& a, const ExprPtr& b) { return a->key() < b->key(); });
    t.akey.clear();
    for (const auto& a : t.atoms) {
        t.akey += a->key();
        t.akey += "|";
    }
}

std::vector<LinTerm> linearize(const ExprPtr& e);

std::vector<LinTerm> linearize_normalized(const ExprPtr& normalized) {
    return linearize(normalized);
}

std::vector<LinTerm> linearize(const ExprPtr& e) {
    switch (e->op) {
        case SymbolicExpr::Op::Const: {
            if (e->value.is_zero()) return {};
            LinTerm t{e->value, {}, ""};
            return {t};
        }
        case SymbolicExpr::Op::Var:
        case SymbolicExpr::Op::NeighborSum: {
            LinTerm t{Rational(1), {e}, ""};
            finish_term(t);
            return {t};
        }
        case SymbolicExpr::Op::Add: {
            std::vector<LinTerm> out;
            for (const auto& a : e->args) {
                auto sub = linearize(a);
                out.insert(out.end(), sub.begin(), sub.end());
            }
            return out;
        }
        case SymbolicExpr::Op::Sub: {
            std::vector<LinTerm> out = linearize(e->args[0]);
            for (LinTerm t : linearize(e->args[1])) {
                t.coeff = Rational(0) - t.coeff;
                out.push_back(std::move(t));
            }
            return out;
        }
        case SymbolicExpr::Op::Mul: {
            std::vector<LinTerm> acc{LinTerm{Rational(1), {}, ""}};
            for (const auto& a : e->args) {
                std::vector<LinTerm> rhs = linearize(a);
                std::vector<LinTerm> next;
                for (const auto& x : acc) {
                    for (const auto& y : rhs) {
                        LinTerm t;
                        t.coeff = x.coeff * y.coeff;
                        t.atoms = x.atoms;
                        t.atoms.insert(t.atoms.end(), y.atoms.begin(), y.atoms.end());
                        finish_term(t);
                        next.push_back(std::move(t));
                    }
                }
                acc = std::move(next);
            }
            return acc;
        }
        case SymbolicExpr::Op::Div: {
            ExprPtr num = normalize(e->args[0]);
            ExprPtr den = normalize(e->args[1]);
            if (den->op == SymbolicExpr::Op::Const) {
                if (den->value.is_zero()) return {};  // x/0 == 0
                std::vector<LinTerm> out = linearize_normalized(num);
                for (auto& t : out) t.coeff /= den->value;
                return out;
            }
            if (num->op == SymbolicExpr::Op::Const && num->value.is_zero()) return {};
            LinTerm t{Rational(1), {SymbolicExpr::div(num, den)}, ""};
            finish_term(t);
            return {t};
        }
        case SymbolicExpr::Op::Min: {
            ExprPtr a = normalize(e->args[0]);
            ExprPtr b = normalize(e->args[1]);
            if (a->op == SymbolicExpr::Op::Const && b->op == SymbolicExpr::Op::Const) {
                Rational v = rational_min(a->value, b->value);
                if (v.is_zero()) return {};
                return {LinTerm{v, {}, ""}};
            }
            if (a->key() == b->key()) return linearize_normalized(a);
            if (b->key() < a->key()) std::swap(a, b);  // min is symmetric
            LinTerm t{Rational(1), {SymbolicExpr::min2(a, b)}, ""};
            finish_term(t);
            return {t};
        }
    }
    return {};
}

ExprPtr rebuild_term(const LinTerm& t, const Rational& coeff_abs) {
    if (t.atoms.empty()) return SymbolicExpr::constant(coeff_abs);
    std::vector<ExprPtr> factors;
    if (!coeff_abs.is_one()) factors.push_back(SymbolicExpr::constant(coeff_abs));
    factors.insert(factors.end(), t.atoms.begin(), t.atoms.end());
    return SymbolicExpr::mul(std::move(factors));
}

ExprPtr rebuild_sum(const std::vector<ExprPtr>& terms) {
    if (terms.empty()) return SymbolicExpr::constant(Rational(0));
    if (terms.size() == 1) return terms[0];
    std::vector<ExprPtr> copy = terms;
    return SymbolicExpr::add(std::move(copy));
}

}  // namespace

ExprPtr normalize(const ExprPtr& e) {
    std::vector<LinTerm> raw = linearize(e);
    std::map<std::string, LinTerm> merged;
    for (auto& t : raw) {
        auto it = merged.find(t.akey);
        if (it == merged.end()) {
            merged.emplace(t.akey, std::move(t));
        } else {
            it->second.coeff += t.coeff;
        }
    }
    std::vector<ExprPtr> pos, neg;
    for (const auto& [akey, t] : merged) {
        (void)akey;
        if (t.coeff.is_zero()) continue;
        if (t.coeff > Rational(0)) {
            pos.push_back(rebuild_term(t, t.coeff));
        } else {
            neg.push_back(rebuild_term(t, Rational(0) - t.coeff));
        }
    }
    ExprPtr result = rebuild_sum(pos);
    if (!neg.empty()) result = SymbolicExpr::sub(result, rebuild_sum(neg));
    return result;
}

bool equal_normalized(const ExprPtr& a, const ExprPtr& b) {
    return normalize(a)->key() == normalize(b)->key();
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

// 1: additive, 2: multiplicative, 3: atomic
int precedence(const SymbolicExpr& e) {
    switch (e.op) {
        case SymbolicExpr::Op::Add:
        case SymbolicExpr::Op::Sub:
        case SymbolicExpr::Op::NeighborSum:
            return 1;
        case SymbolicExpr::Op::Mul:
        case SymbolicExpr::Op::Div:
            return 2;
        default:
            return 3;
    }
}

std::string render(const ExprPtr& e, const StateNamer& sn, const LocNamer& ln);

std::string render_at_least(const ExprPtr& e, int min_prec, const StateNamer& sn,
                            const LocNamer& ln) {
    std::string s = render(e, sn, ln);
    if (precedence(*e) < min_prec) return "(" + s + ")";
    return s;
}

std::string render(const ExprPtr& e, const StateNamer& sn, const LocNamer& ln) {
    switch (e->op) {
        case SymbolicExpr::Op::Const:
            return e->value.str();
        case SymbolicExpr::Op::Var:
            return sn(e->state) + "(t-1)@" + ln(e->loc);
        case SymbolicExpr::Op::Add: {
            std::string out;
            for (size_t i = 0; i < e->args.size(); ++i) {
                if (i) out += " + ";
                out += render(e->args[i], sn, ln);
            }
            return out;
        }
        case SymbolicExpr::Op::Sub:
            return render(e->args[0], sn, ln) + " - " +
                   render_at_least(e->args[1], 2, sn, ln);
        case SymbolicExpr::Op::Mul: {
            std::string out;
            for (size_t i = 0; i < e->args.size(); ++i) {
                if (i) out += " * ";
                out += render_at_least(e->args[i], 2, sn, ln);
            }
            return out;
        }
        case SymbolicExpr::Op::Div:
            return render_at_least(e->args[0], 2, sn, ln) + " / " +
                   render_at_least(e->args[1], 3, sn, ln);
        case SymbolicExpr::Op::Min:
            return "min(" + render(e->args[0], sn, ln) + ", " + render(e->args[1], sn, ln) + ")";
        case SymbolicExpr::Op::NeighborSum:
            return "sum{l' in Nb(" + ln(e->loc) + ")} " + sn(e->state) + "(t-1)@l' / deg(l')";
    }
    return "?";
}

}  // namespace

std::string expr_text(const ExprPtr& e, const StateNamer& sn, const LocNamer& ln) {
    return render(e, sn, ln);
}

}  // namespace spalps
