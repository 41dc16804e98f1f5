#pragma once

// Test-side reference computations, written independently of the library's
// filters and solvers. They favour directness over speed.

#include "hsilab/core/trace.hpp"
#include "hsilab/core/types.hpp"
#include "hsilab/envs/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace hsilab::testing {

inline double transition_prob(const envs::EnvModel& m, std::size_t h, std::size_t s, std::size_t a, std::size_t t) {
    double p = 0.0;
    for (const auto& e : m.next(h, s, a))
        if (e.next == t) p += e.prob;
    return p;
}

/// Value of the best (action, query) policy from an unnormalized state mass
/// at step h. Values are linear in the mass, so no normalization is needed.
inline double expectimax(const envs::EnvModel& m, std::size_t h, const std::vector<double>& mass) {
    const Dims& dims = m.dims;
    const std::size_t S = m.state_count();
    const auto queries = enumerate_query_sets(dims);
    const std::size_t O = std::max<std::size_t>(m.observations, 1);
    const std::size_t V = dims.query_value_count();
    double best = -1.0;
    for (std::size_t a = 0; a < dims.actions; ++a) {
        double immediate = 0.0;
        for (std::size_t s = 0; s < S; ++s) immediate += mass[s] * m.reward_mean(h, s, a);
        if (h == dims.horizon) {
            best = std::max(best, immediate);
            continue;
        }
        for (std::size_t qid = 0; qid < queries.size(); ++qid) {
            const QuerySet& q = queries[qid];
            double future = 0.0;
            for (std::size_t v = 0; v < V; ++v)
                for (std::size_t o = 0; o < O; ++o) {
                    std::vector<double> next(S, 0.0);
                    double total = 0.0;
                    for (std::size_t s = 0; s < S; ++s) {
                        if (mass[s] == 0.0) continue;
                        // queried values of s, as a mixed-radix number in q's order
                        std::size_t code = 0, radix = 1;
                        std::size_t rest = 0, rest_radix = 1;
                        for (std::size_t i = 0; i < dims.d; ++i) {
                            std::size_t x = s;
                            for (std::size_t j = 0; j < i; ++j) x /= dims.alphabet;
                            x %= dims.alphabet;
                            if (q.contains(i)) {
                                code += x * radix;
                                radix *= dims.alphabet;
                            } else {
                                rest += x * rest_radix;
                                rest_radix *= dims.alphabet;
                            }
                        }
                        if (code != v) continue;
                        const double e = m.has_emissions() ? m.emission(h, qid, o, rest) : 1.0;
                        for (std::size_t t = 0; t < S; ++t) {
                            const double w = mass[s] * e * transition_prob(m, h, s, a, t);
                            next[t] += w;
                            total += w;
                        }
                    }
                    if (total > 0.0) future += expectimax(m, h + 1, next);
                }
            best = std::max(best, immediate + future);
        }
    }
    return best;
}

inline double brute_optimal_value(const envs::EnvModel& m) { return expectimax(m, 1, m.initial); }

/// Probability of the trace's HSI and observations, summed over every hidden
/// state path s_1..s_H.
inline double path_sum_likelihood(const envs::EnvModel& m, const EpisodeTrace& trace) {
    const Dims& dims = m.dims;
    const std::size_t S = m.state_count();
    const auto queries = enumerate_query_sets(dims);
    std::vector<std::size_t> path(dims.horizon, 0);
    double total = 0.0;
    while (true) {
        double p = m.initial[path[0]];
        for (std::size_t h = 1; h <= dims.horizon && p > 0.0; ++h) {
            const std::size_t s = path[h - 1];
            const auto& rec = trace.steps[h - 1];
            const StateVector sv = decode_state({s}, dims);
            for (const auto& e : rec.hsi)
                if (sv.values[e.index] != e.value) p = 0.0;
            if (p == 0.0) break;
            if (m.has_emissions()) {
                std::size_t rest = 0, radix = 1;
                for (std::size_t i = 0; i < dims.d; ++i)
                    if (!rec.query.contains(i)) {
                        rest += sv.values[i] * radix;
                        radix *= dims.alphabet;
                    }
                std::size_t qid = 0;
                while (!(queries[qid] == rec.query)) ++qid;
                p *= m.emission(h, qid, *rec.observation, rest);
            }
            if (h < dims.horizon) p *= transition_prob(m, h, s, rec.action, path[h]);
        }
        total += p;
        std::size_t k = 0;
        while (k < path.size() && ++path[k] == S) path[k++] = 0;
        if (k == path.size()) break;
    }
    return total;
}

/// Optimal value when every sub-state is revealed after acting: the decision
/// at step h may use s_{h-1} and a_{h-1} but not s_h.
inline double delayed_state_value(const envs::EnvModel& m) {
    const Dims& dims = m.dims;
    const std::size_t S = m.state_count(), A = dims.actions, H = dims.horizon;
    // W[s_prev * A + a_prev]: value from step h on, given the previous state and action
    std::vector<double> W(S * A, 0.0);
    auto value_from = [&](std::size_t h, const std::vector<double>& belief, const std::vector<double>& next_w) {
        double best = -1.0;
        for (std::size_t a = 0; a < A; ++a) {
            double v = 0.0;
            for (std::size_t s = 0; s < S; ++s) {
                if (belief[s] == 0.0) continue;
                v += belief[s] * (m.reward_mean(h, s, a) + (h < H ? next_w[s * A + a] : 0.0));
            }
            best = std::max(best, v);
        }
        return best;
    };
    for (std::size_t h = H; h >= 2; --h) {
        std::vector<double> cur(S * A, 0.0);
        for (std::size_t sp = 0; sp < S; ++sp)
            for (std::size_t ap = 0; ap < A; ++ap) {
                std::vector<double> belief(S, 0.0);
                for (std::size_t t = 0; t < S; ++t) belief[t] = transition_prob(m, h - 1, sp, ap, t);
                cur[sp * A + ap] = value_from(h, belief, W);
            }
        W = std::move(cur);
    }
    return value_from(1, m.initial, W);
}

/// Optimal value when the current state is fully observed before acting.
inline double full_observation_value(const envs::EnvModel& m) {
    const Dims& dims = m.dims;
    const std::size_t S = m.state_count();
    std::vector<double> V(S, 0.0);
    for (std::size_t h = dims.horizon; h >= 1; --h) {
        std::vector<double> cur(S, 0.0);
        for (std::size_t s = 0; s < S; ++s) {
            double best = -1.0;
            for (std::size_t a = 0; a < dims.actions; ++a) {
                double v = m.reward_mean(h, s, a);
                if (h < dims.horizon)
                    for (std::size_t t = 0; t < S; ++t) v += transition_prob(m, h, s, a, t) * V[t];
                best = std::max(best, v);
            }
            cur[s] = best;
        }
        V = std::move(cur);
    }
    double total = 0.0;
    for (std::size_t s = 0; s < S; ++s) total += m.initial[s] * V[s];
    return total;
}

} // namespace hsilab::testing
