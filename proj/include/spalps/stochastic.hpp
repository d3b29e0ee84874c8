#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spalps/meanfield.hpp"

namespace spalps {

// xoshiro256++ with SplitMix64 seeding: fast, reproducible across platforms,
// and cheap to fork one independent stream per replica.
struct Rng {
    std::uint64_t s[4];

    static Rng seeded(std::uint64_t seed);
    std::uint64_t next();
    double uniform();  // [0, 1)
};

std::uint64_t splitmix64_next(std::uint64_t& state);

// Bernoulli-sum binomial: exact distribution, O(n) draws.
std::int64_t binomial_draw(Rng& rng, std::int64_t n, double p);

// Sequential conditional binomials; the last cell takes the remainder, so the
// result always sums to n exactly.
std::vector<std::int64_t> multinomial_draw(Rng& rng, std::int64_t n,
                                           const std::vector<double>& probs);

// Count of marked items in `draws` draws without replacement from a pool of
// `total` items of which `marked` are marked.
std::int64_t hypergeometric_draw(Rng& rng, std::int64_t total, std::int64_t marked,
                                 std::int64_t draws);

// One replica: integer occupancies driven by the same rows and phase
// classifier as the deterministic evaluator.
struct StochasticRun {
    int states = 0;
    int locations = 0;
    std::vector<Phase> phases;                    // phases[t] labels frame t
    std::vector<std::vector<std::int64_t>> frames;
    bool stalled = false;
};

StochasticRun simulate_once(const Compiled& c, int steps, std::uint64_t seed);

// Replica ensemble, sequential, with per-frame per-cell mean and sample
// standard deviation accumulated in replica order (bit-reproducible).
struct Ensemble {
    int states = 0;
    int locations = 0;
    int replicas = 0;
    int frame_count = 0;                  // shortest replica, in frames
    std::vector<Phase> phases;            // replica 0's sequence
    bool phases_agree = true;             // all replicas saw the same sequence
    bool any_stalled = false;
    std::vector<std::vector<double>> mean;    // per frame: states x locations
    std::vector<std::vector<double>> stddev;  // sample std (n-1); 0 for replicas == 1
};

Ensemble run_ensemble(const Compiled& c, int steps, std::uint64_t seed, int replicas);

// Per-frame relative L1 distance between the deterministic trajectory and the
// ensemble mean: sum|mf - mean| / sum(mf), absolute sum when the frame's
// deterministic total is zero.
struct CompareReport {
    int frames_compared = 0;
    std::vector<double> l1;
    double max_l1 = 0.0;
    bool phases_aligned = true;
    std::vector<std::string> notes;  // misalignments and length mismatches
};

CompareReport compare_trajectories(const Trajectory& mf, const Ensemble& mc);

}  // namespace spalps
