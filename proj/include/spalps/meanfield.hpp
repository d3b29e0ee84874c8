#pragma once

#include <string>
#include <vector>

#include "spalps/stt.hpp"

namespace spalps {

// Frames are labeled with the phase of the transition that produced them;
// frame 0 is Init. Phases are chosen dynamically per micro-step: pending
// probabilistic work first, then spatial/communication work, then the clock.
enum class Phase { Init, Prob, Action, Tick, Dead, Stalled };

const char* phase_name(Phase p);

Phase classify_phase(const STT& stt, const std::vector<char>& populated);

// True when the pending phase cannot change the frame under any outcome:
// the system is livelocked (time can no longer advance). Tick and Dead
// phases never stall.
bool phase_cannot_progress(const STT& stt, Phase p, const std::vector<double>& cells,
                           int states, const Habitat& h);

struct Frame {
    Phase phase = Phase::Init;
    std::vector<double> cells;  // states x locations, row-major

    double at(int state, int loc, int locations) const {
        return cells[static_cast<size_t>(state) * locations + loc];
    }
};

struct Trajectory {
    int states = 0;
    int locations = 0;
    std::vector<Frame> frames;
    bool stalled = false;

    double total(int frame) const {
        double t = 0;
        for (double c : frames[frame].cells) t += c;
        return t;
    }
};

// Everything derived from one validated model, built deterministically.
struct Compiled {
    ValidatedModel model;
    StateSpace space;
    InitMatrix init;
    STT stt;
};

Compiled compile_model(const ValidatedModel& m);

// Deterministic mean trajectory: `steps` micro-frames after the initial one.
// Stops early with a Stalled frame when a livelock is detected.
Trajectory evaluate(const Compiled& c, int steps);

// Frame 0 plus the frames the clock produced, in order.
Trajectory collapse_ticks(const Trajectory& t);

// ---------------------------------------------------------------------------
// Recurrence system

// One update per (state, location): occupancy at t from occupancies at t-1,
// normalized. Column sums of the dense table; phase gating is the
// evaluator's job, so iterating these raw equations reproduces the evaluator
// only on models whose states are phase-aligned.
struct EquationSystem {
    int states = 0;
    int locations = 0;
    std::vector<ExprPtr> rhs;  // states x locations, row-major, normalized

    const ExprPtr& at(int state, int loc) const {
        return rhs[static_cast<size_t>(state) * locations + loc];
    }

    std::vector<double> iterate(const std::vector<double>& prev, const Habitat& h) const;
};

EquationSystem derive_equations(const DenseSTT& dense, const Habitat& h);

// Location-generic recurrences printed from the rows (one line per state,
// `@l` relative form), followed by the nonzero initial conditions. States
// with location-specific flows fall back to one line per location.
std::string equations_text(const Compiled& c);

}  // namespace spalps
