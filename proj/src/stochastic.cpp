#include "spalps/stochastic.hpp"

#include <algorithm>
#include <cmath>

namespace spalps {

std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Rng Rng::seeded(std::uint64_t seed) {
    Rng r;
    std::uint64_t sm = seed;
    for (auto& word : r.s) word = splitmix64_next(sm);
    return r;
}

namespace {
inline std::uint64_t rotl64(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace

std::uint64_t Rng::next() {
    std::uint64_t result = rotl64(s[0] + s[3], 23) + s[0];
    std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl64(s[3], 45);
    return result;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::int64_t binomial_draw(Rng& rng, std::int64_t n, double p) {
    if (n <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    std::int64_t hits = 0;
    for (std::int64_t i = 0; i < n; ++i) {
        if (rng.uniform() < p) ++hits;
    }
    return hits;
}

std::vector<std::int64_t> multinomial_draw(Rng& rng, std::int64_t n,
                                           const std::vector<double>& probs) {
    std::vector<std::int64_t> out(probs.size(), 0);
    if (probs.empty()) return out;
    double remaining_mass = 1.0;
    std::int64_t remaining = n;
    for (size_t i = 0; i + 1 < probs.size(); ++i) {
        if (remaining <= 0) break;
        double cond = remaining_mass > 0.0 ? probs[i] / remaining_mass : 1.0;
        cond = std::min(1.0, std::max(0.0, cond));
        std::int64_t draw = binomial_draw(rng, remaining, cond);
        out[i] = draw;
        remaining -= draw;
        remaining_mass -= probs[i];
    }
    out.back() += remaining;  // exact total by construction
    return out;
}

std::int64_t hypergeometric_draw(Rng& rng, std::int64_t total, std::int64_t marked,
                                 std::int64_t draws) {
    std::int64_t hits = 0;
    std::int64_t rest = total;
    std::int64_t mk = marked;
    for (std::int64_t i = 0; i < draws; ++i) {
        if (mk <= 0 || rest <= 0) break;
        if (mk >= rest) {  // every remaining item is marked
            hits += draws - i;
            break;
        }
        double p = static_cast<double>(mk) / static_cast<double>(rest);
        if (rng.uniform() < p) {
            ++hits;
            --mk;
        }
        --rest;
    }
    return hits;
}

// ---------------------------------------------------------------------------
// Single replica

namespace {

std::vector<std::int64_t> apply_step_counts(const Compiled& c,
                                            const std::vector<std::int64_t>& cur, Phase p,
                                            Rng& rng) {
    const STT& stt = c.stt;
    const Habitat& h = c.model.habitat;
    int n = c.space.size();
    int m = h.location_count();
    std::vector<std::int64_t> next(cur.size(), 0);
    auto get = [&](int k, int l) { return cur[static_cast<size_t>(k) * m + l]; };
    auto put = [&](int k, int l, std::int64_t v) { next[static_cast<size_t>(k) * m + l] += v; };

    // Matched counts per comm participant, decided before routing.
    std::vector<std::int64_t> matched(cur.size(), 0);
    if (p == Phase::Action) {
        for (const auto& g : stt.groups) {
            for (int l = 0; l < m; ++l) {
                std::int64_t xin = 0, xout = 0;
                for (int k : g.inputs) xin += get(k, l);
                for (int k : g.outputs) xout += get(k, l);
                std::int64_t matches = std::min(xin, xout);
                // Matched individuals are drawn uniformly from each side's
                // pool: sequential hypergeometric split over member states.
                std::int64_t pool = xin, left = matches;
                for (int k : g.inputs) {
                    std::int64_t q = get(k, l);
                    std::int64_t mk = (pool == q) ? left : hypergeometric_draw(rng, pool, q, left);
                    matched[static_cast<size_t>(k) * m + l] = mk;
                    pool -= q;
                    left -= mk;
                }
                pool = xout;
                left = matches;
                for (int k : g.outputs) {
                    std::int64_t q = get(k, l);
                    std::int64_t mk = (pool == q) ? left : hypergeometric_draw(rng, pool, q, left);
                    matched[static_cast<size_t>(k) * m + l] = mk;
                    pool -= q;
                    left -= mk;
                }
            }
        }
    }

    auto fires = [&](RowKind kind) {
        switch (p) {
            case Phase::Prob:
                return kind == RowKind::Prob || kind == RowKind::Disperse;
            case Phase::Action:
                return kind == RowKind::Go || kind == RowKind::Free || kind == RowKind::Comm;
            case Phase::Tick:
                return kind == RowKind::Tick;
            default:
                return false;
        }
    };

    for (int k = 0; k < n; ++k) {
        const RowSpec& row = stt.rows[k];
        if (!fires(row.kind)) {
            for (int l = 0; l < m; ++l) {
                std::int64_t q = get(k, l);
                if (q != 0) put(k, l, q);
            }
            continue;
        }
        switch (row.kind) {
            case RowKind::Prob: {
                std::vector<double> probs;
                probs.reserve(row.branches.size());
                for (const auto& b : row.branches) probs.push_back(b.prob.to_double());
                for (int l = 0; l < m; ++l) {
                    std::int64_t q = get(k, l);
                    if (q == 0) continue;
                    std::vector<std::int64_t> split = multinomial_draw(rng, q, probs);
                    for (size_t bi = 0; bi < split.size(); ++bi) {
                        if (split[bi] == 0) continue;
                        for (const auto& t : row.branches[bi].targets) {
                            put(t.state, l, split[bi] * t.mult);
                        }
                    }
                }
                break;
            }
            case RowKind::Disperse:
                for (int l = 0; l < m; ++l) {
                    std::int64_t q = get(k, l);
                    if (q == 0) continue;
                    const auto& nb = h.neighbors(l);
                    if (nb.empty()) {
                        put(k, l, q);
                        continue;
                    }
                    std::vector<double> probs(nb.size(), 1.0 / static_cast<double>(nb.size()));
                    std::vector<std::int64_t> split = multinomial_draw(rng, q, probs);
                    for (size_t ni = 0; ni < nb.size(); ++ni) {
                        if (split[ni] == 0) continue;
                        for (const auto& t : row.cont) put(t.state, nb[ni], split[ni] * t.mult);
                    }
                }
                break;
            case RowKind::Go:
                for (int l = 0; l < m; ++l) {
                    std::int64_t q = get(k, l);
                    if (q == 0) continue;
                    int dst = resolve_loc_rule(row.where, l, h);
                    for (const auto& t : row.cont) put(t.state, dst, q * t.mult);
                }
                break;
            case RowKind::Free:
            case RowKind::Tick:
                for (int l = 0; l < m; ++l) {
                    std::int64_t q = get(k, l);
                    if (q == 0) continue;
                    for (const auto& t : row.cont) put(t.state, l, q * t.mult);
                }
                break;
            case RowKind::Comm:
                for (int l = 0; l < m; ++l) {
                    std::int64_t q = get(k, l);
                    if (q == 0) continue;
                    std::int64_t mk = matched[static_cast<size_t>(k) * m + l];
                    std::int64_t shortfall = q - mk;
                    if (mk != 0) {
                        for (const auto& t : row.then_cont) put(t.state, l, mk * t.mult);
                    }
                    if (shortfall != 0) {
                        for (const auto& t : row.else_cont) put(t.state, l, shortfall * t.mult);
                    }
                }
                break;
            case RowKind::Nil:
                break;
        }
    }
    return next;
}

}  // namespace

StochasticRun simulate_once(const Compiled& c, int steps, std::uint64_t seed) {
    int n = c.space.size();
    int m = c.model.habitat.location_count();
    Rng rng = Rng::seeded(seed);

    StochasticRun run;
    run.states = n;
    run.locations = m;
    run.frames.push_back(std::vector<std::int64_t>(c.init.cells.begin(), c.init.cells.end()));
    run.phases.push_back(Phase::Init);

    std::vector<char> populated(n);
    std::vector<double> as_double(static_cast<size_t>(n) * m);
    for (int step = 1; step <= steps; ++step) {
        const auto& cur = run.frames.back();
        for (int k = 0; k < n; ++k) {
            populated[k] = 0;
            for (int l = 0; l < m; ++l) {
                if (cur[static_cast<size_t>(k) * m + l] > 0) {
                    populated[k] = 1;
                    break;
                }
            }
        }
        Phase p = classify_phase(c.stt, populated);
        if (p == Phase::Prob || p == Phase::Action) {
            for (size_t i = 0; i < cur.size(); ++i) as_double[i] = static_cast<double>(cur[i]);
            if (phase_cannot_progress(c.stt, p, as_double, n, c.model.habitat)) {
                run.frames.push_back(cur);
                run.phases.push_back(Phase::Stalled);
                run.stalled = true;
                break;
            }
        }
        if (p == Phase::Dead) {
            run.frames.push_back(cur);
            run.phases.push_back(Phase::Dead);
            continue;
        }
        run.frames.push_back(apply_step_counts(c, cur, p, rng));
        run.phases.push_back(p);
    }
    return run;
}

// ---------------------------------------------------------------------------
// Ensemble

Ensemble run_ensemble(const Compiled& c, int steps, std::uint64_t seed, int replicas) {
    Ensemble ens;
    ens.states = c.space.size();
    ens.locations = c.model.habitat.location_count();
    ens.replicas = replicas;

    std::uint64_t sm = seed;
    std::vector<std::uint64_t> replica_seeds;
    replica_seeds.reserve(replicas);
    for (int r = 0; r < replicas; ++r) replica_seeds.push_back(splitmix64_next(sm));

    std::vector<std::vector<double>> m2;  // Welford accumulators
    for (int r = 0; r < replicas; ++r) {
        StochasticRun run = simulate_once(c, steps, replica_seeds[r]);
        ens.any_stalled = ens.any_stalled || run.stalled;
        int frames = static_cast<int>(run.frames.size());
        if (r == 0) {
            ens.frame_count = frames;
            ens.phases = run.phases;
            ens.mean.assign(frames, std::vector<double>(run.frames[0].size(), 0.0));
            m2.assign(frames, std::vector<double>(run.frames[0].size(), 0.0));
        } else {
            if (frames < ens.frame_count) ens.frame_count = frames;
            int common = std::min<int>(frames, static_cast<int>(ens.phases.size()));
            for (int t = 0; t < common; ++t) {
                if (run.phases[t] != ens.phases[t]) ens.phases_agree = false;
            }
            if (frames != static_cast<int>(ens.phases.size())) ens.phases_agree = false;
        }
        int usable = std::min<int>(frames, static_cast<int>(ens.mean.size()));
        for (int t = 0; t < usable; ++t) {
            for (size_t i = 0; i < run.frames[t].size(); ++i) {
                double x = static_cast<double>(run.frames[t][i]);
                double delta = x - ens.mean[t][i];
                ens.mean[t][i] += delta / static_cast<double>(r + 1);
                m2[t][i] += delta * (x - ens.mean[t][i]);
            }
        }
    }
    ens.mean.resize(ens.frame_count);
    m2.resize(ens.frame_count);
    ens.phases.resize(ens.frame_count);
    ens.stddev.assign(ens.frame_count, std::vector<double>());
    for (int t = 0; t < ens.frame_count; ++t) {
        ens.stddev[t].assign(ens.mean[t].size(), 0.0);
        if (replicas > 1) {
            for (size_t i = 0; i < m2[t].size(); ++i) {
                ens.stddev[t][i] = std::sqrt(m2[t][i] / static_cast<double>(replicas - 1));
            }
        }
    }
    return ens;
}

// ---------------------------------------------------------------------------
// Comparison

CompareReport compare_trajectories(const Trajectory& mf, const Ensemble& mc) {
    CompareReport rep;
    int frames = std::min<int>(static_cast<int>(mf.frames.size()), mc.frame_count);
    if (static_cast<int>(mf.frames.size()) != mc.frame_count) {
        rep.notes.push_back("trajectory lengths differ: deterministic " +
                            std::to_string(mf.frames.size()) + " frames, ensemble " +
                            std::to_string(mc.frame_count));
    }
    if (!mc.phases_agree) {
        rep.phases_aligned = false;
        rep.notes.push_back("ensemble replicas disagree on the phase sequence");
    }
    rep.frames_compared = frames;
    for (int t = 0; t < frames; ++t) {
        if (mf.frames[t].phase != mc.phases[t]) {
            rep.phases_aligned = false;
            rep.notes.push_back("frame " + std::to_string(t) + ": phase " +
                                phase_name(mf.frames[t].phase) + " vs " +
                                phase_name(mc.phases[t]));
        }
        double diff = 0.0, ref = 0.0;
        for (size_t i = 0; i < mf.frames[t].cells.size(); ++i) {
            diff += std::abs(mf.frames[t].cells[i] - mc.mean[t][i]);
            ref += mf.frames[t].cells[i];
        }
        double l1 = ref > 0.0 ? diff / ref : diff;
        rep.l1.push_back(l1);
        rep.max_l1 = std::max(rep.max_l1, l1);
    }
    return rep;
}

}  // namespace spalps
