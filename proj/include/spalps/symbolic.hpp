#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "spalps/model.hpp"
#include "spalps/rational.hpp"

namespace spalps {

class SymbolicExpr;
using ExprPtr = std::shared_ptr<const SymbolicExpr>;

// Expression over previous-frame occupancies. Var(state, loc) reads state
// `state` at absolute location `loc` at time t-1. Constants are nonnegative
// rationals; subtraction is explicit so the invariant is visible. Division by
// an exactly-zero denominator evaluates to zero (empty-group convention).
class SymbolicExpr {
public:
    enum class Op { Const, Var, Add, Sub, Mul, Div, Min, NeighborSum };

    Op op = Op::Const;
    Rational value;            // Const
    int state = -1;            // Var, NeighborSum
    int loc = -1;              // Var: location; NeighborSum: center location
    std::vector<ExprPtr> args; // Add/Mul: n-ary; Sub/Div/Min: exactly two

    static ExprPtr constant(Rational v);
    static ExprPtr var(int state, int loc);
    static ExprPtr add(std::vector<ExprPtr> terms);
    static ExprPtr sub(ExprPtr a, ExprPtr b);
    static ExprPtr mul(std::vector<ExprPtr> factors);
    static ExprPtr div(ExprPtr num, ExprPtr den);
    static ExprPtr min2(ExprPtr a, ExprPtr b);
    // Sum over neighbors l' of the center: Var(state, l') / degree(l').
    static ExprPtr neighbor_sum(int state, int center_loc);

    std::string key() const;
};

// Previous-frame occupancy accessor.
using Occupancy = std::function<double(int state, int loc)>;

double eval_expr(const ExprPtr& e, const Occupancy& prev, const Habitat& h);

// Exact evaluation; division keeps the zero-denominator convention.
Rational eval_expr_exact(const ExprPtr& e,
                         const std::function<Rational(int, int)>& prev,
                         const Habitat& h);

// Canonical form: sum of coefficient-weighted products of irreducible atoms
// (Var / Min / Div / NeighborSum), products distributed over sums, constants
// folded, zero terms dropped, terms merged and sorted. Negative aggregate
// terms are re-expressed through a single top-level Sub so Const leaves stay
// nonnegative. normalize is idempotent; equal_normalized compares key() of
// normal forms.
ExprPtr normalize(const ExprPtr& e);
bool equal_normalized(const ExprPtr& a, const ExprPtr& b);

// Renders with state/location names, e.g. "1/2 * R_6(t-1)@2 + min(...)".
using StateNamer = std::function<std::string(int state)>;
using LocNamer = std::function<std::string(int loc)>;
std::string expr_text(const ExprPtr& e, const StateNamer& sn, const LocNamer& ln);

}  // namespace spalps
