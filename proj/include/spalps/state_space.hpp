#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "spalps/validate.hpp"

namespace spalps {

enum class HeadKind { Nil, Prob, Go, Tick, Chan, CondComm };

const char* head_kind_name(HeadKind k);

// A parallel-free, constant-unfolded individual term. Identity is the pair
// (species, structural key); `display` prefers the defining constant's name.
struct CanonicalState {
    TermPtr term;
    int species = -1;
    std::string key;
    std::string display;
    HeadKind head = HeadKind::Nil;
    bool disperse = false;  // neighbor-choice dispersal state (head == Prob)
    Action action;          // head action for Go/Chan/CondComm heads
};

struct StateSpace {
    std::vector<CanonicalState> states;

    int size() const { return static_cast<int>(states.size()); }
    // -1 when absent
    int find(int species, const std::string& key) const;
    const CanonicalState& operator[](int i) const { return states[i]; }

    std::map<std::pair<int, std::string>, int> index;
};

inline constexpr int kMaxStates = 10000;

struct StateSpaceOverflowError : std::runtime_error {
    explicit StateSpaceOverflowError(const std::string& witness_text)
        : std::runtime_error("state space exceeds " + std::to_string(kMaxStates) +
                             " states; growth witness: " + witness_text),
          witness(witness_text) {}
    std::string witness;
};

// Breadth-first closure of the initial processes under one-step derivatives.
// Initial processes get the lowest indices in system declaration order.
// Deterministic: the same model text always yields the same indices.
StateSpace enumerate_states(const ValidatedModel& m);

struct InitMatrix {
    int states = 0;
    int locations = 0;
    std::vector<std::int64_t> cells;  // states x locations, row-major

    std::int64_t at(int state, int loc) const { return cells[state * locations + loc]; }
    std::int64_t& at(int state, int loc) { return cells[state * locations + loc]; }
    std::int64_t total() const {
        std::int64_t t = 0;
        for (auto c : cells) t += c;
        return t;
    }
};

InitMatrix build_init_matrix(const ValidatedModel& m, const StateSpace& space);

}  // namespace spalps
