#pragma once

#include <functional>
#include <string>
#include <vector>

#include "spalps/state_space.hpp"
#include "spalps/symbolic.hpp"

namespace spalps {

// What a state does when its phase fires. Rows are written once and shared by
// the deterministic evaluator, the stochastic simulator, the symbolic table,
// and the recurrence printer, so the three semantics cannot drift apart.
enum class RowKind { Nil, Prob, Go, Tick, Comm, Free, Disperse };

const char* row_kind_name(RowKind k);

// Where a moved individual lands relative to its source location.
struct LocRule {
    enum class Kind { Same, Offset, Fixed, Scatter };
    Kind kind = Kind::Same;
    int offset = 0;  // Offset: ring shift
    int fixed = -1;  // Fixed: absolute location index

    static LocRule same() { return {}; }
    static LocRule shifted(int d) { return {Kind::Offset, d, -1}; }
    static LocRule at(int loc) { return {Kind::Fixed, 0, loc}; }
    static LocRule scatter() { return {Kind::Scatter, 0, -1}; }
};

// Destination location for a unit moving from `src` under this rule.
// Scatter has no single destination and must not be resolved here.
int resolve_loc_rule(const LocRule& r, int src, const Habitat& h);

struct SpawnTarget {
    int state = -1;
    int mult = 1;
};

struct ProbBranch {
    Rational prob;                    // resolved against the parameter table
    std::string prob_text;            // as written, e.g. "1 - mu_h"
    std::vector<SpawnTarget> targets;
};

struct RowSpec {
    RowKind kind = RowKind::Nil;
    int state = -1;

    // Nil/Tick/Go/Free/Disperse continuation (Nil: the state itself).
    LocRule where;
    std::vector<SpawnTarget> cont;

    // Prob
    std::vector<ProbBranch> branches;

    // Comm
    std::string channel;
    bool is_output = false;
    std::vector<SpawnTarget> then_cont;   // matched portion
    std::vector<SpawnTarget> else_cont;   // shortfall portion
    bool else_self = false;               // shortfall stays put (blocking prefix)
};

struct CommGroup {
    std::string channel;
    std::vector<int> inputs;   // state ids, ascending
    std::vector<int> outputs;
};

struct STT {
    std::vector<RowSpec> rows;       // indexed by state
    std::vector<CommGroup> groups;   // sorted by channel

    const CommGroup* group_for(const std::string& channel) const;
};

STT build_stt(const ValidatedModel& m, const StateSpace& space);

// min(q, q*Y/X): expected matched portion for a participant holding q of the
// X-side pool when the opposite pool holds Y. Empty own pool yields zero.
Rational comm_yield(const Rational& q, const Rational& X, const Rational& Y);
double comm_yield(double q, double X, double Y);

// Structural invariants: branch probabilities sum to one, branch lists are
// nonempty, continuations resolve, comm rows carry both outcomes, spawn
// multiplicities are positive. Returns one message per violation.
std::vector<std::string> row_mass_check(const STT& stt, const StateSpace& space);

// Dense symbolic table: flow[source][target][target_loc] as an expression in
// previous-frame occupancies of `source`. Gather form: the cell at target
// location j references the source locations that feed j.
struct DenseSTT {
    int states = 0;
    int locations = 0;
    std::vector<ExprPtr> cells;  // states x states x locations; null == zero

    const ExprPtr& at(int src, int tgt, int loc) const {
        return cells[(static_cast<size_t>(src) * states + tgt) * locations + loc];
    }
    ExprPtr& at(int src, int tgt, int loc) {
        return cells[(static_cast<size_t>(src) * states + tgt) * locations + loc];
    }
};

DenseSTT materialize(const STT& stt, const StateSpace& space, const Habitat& h);

// Human-readable table, one block per state in index order.
std::string stt_text(const STT& stt, const StateSpace& space, const Habitat& h);

}  // namespace spalps
