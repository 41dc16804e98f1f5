#pragma once

#include "hsilab/core/trace.hpp"
#include "hsilab/core/types.hpp"
#include "hsilab/envs/model.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hsilab::oracle {

/// Posterior over hidden full states before acting at step `step`.
struct Belief {
    std::size_t step = 1;
    std::vector<double> probs;
};

Belief initial_belief(const envs::EnvModel& m);

/// Result of conditioning a belief on one step of feedback.
struct Update {
    Belief belief;
    /// P(HSI values, observation | prior belief, query).
    double evidence = 0.0;
};

/// Conditions the step-h belief on the queried values and observation without
/// transitioning. Throws InfeasibleEvidenceError when the evidence is zero.
Update condition_belief(const envs::EnvModel& m, const Belief& b, const QuerySet& q,
                        const std::vector<HsiEntry>& hsi, std::optional<std::size_t> observation);

/// Conditions as above, then pushes the posterior through P_h(. | ., action).
/// Requires h <= H-1.
Update belief_update(const envs::EnvModel& m, const Belief& b, std::size_t action,
                     const QuerySet& q, const std::vector<HsiEntry>& hsi,
                     std::optional<std::size_t> observation);

/// Sum of log evidences from repeated belief updates along a trace; -inf when
/// some step has zero evidence.
double trace_log_evidence(const envs::EnvModel& m, const EpisodeTrace& trace);

inline constexpr std::size_t kDefaultOracleCap = 1'000'000;

struct OracleResult {
    double value = 0.0;
    std::size_t first_action = 0;
    QuerySet first_query;
    std::size_t nodes = 0;
    std::size_t leaves = 0;
};

/// Exact optimal value over policies that choose (action, query) jointly from
/// the HSI and observation history, by backward induction over the reachable
/// belief tree. Throws SizeError once more than `cap` nodes are expanded.
OracleResult optimal_value(const envs::EnvModel& m, std::size_t cap = kDefaultOracleCap);

enum class RegretMode { Expected, Realized };

std::string to_string(RegretMode mode);

struct RegretSeries {
    RegretMode mode = RegretMode::Expected;
    double v_star = 0.0;
    std::vector<double> values;
    /// cumulative[k] = sum_{j <= k} (v_star - values[j]).
    std::vector<double> cumulative;
};

RegretSeries compute_regret(std::span<const double> episode_values, double v_star, RegretMode mode);

/// Realized-mode regret from sampled episode totals. Throws ConsistencyError
/// when a trace does not fit the model's dimensions.
RegretSeries compute_regret(const envs::EnvModel& m, std::span<const EpisodeTrace> traces,
                            double v_star);

/// Throws ConsistencyError when the trace does not fit the model.
void check_trace(const envs::EnvModel& m, const EpisodeTrace& trace);

} // namespace hsilab::oracle
