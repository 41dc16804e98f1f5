#pragma once

#include "hsilab/core/rng.hpp"
#include "hsilab/core/types.hpp"

#include <cstddef>
#include <vector>

namespace hsilab::agents {

/// Exponential-weight state for sub-state selection.
///
/// `global_*` weigh all d sub-states. `local_w` is indexed by sub-state as well,
/// and `local_p` is aligned with `current` (one entry per queried index).
struct WeightState {
    std::vector<double> global_w;
    std::vector<double> global_p;
    std::vector<double> local_w;
    std::vector<double> local_p;
    double theta1 = 0.0;
    double theta2 = 0.0;
    std::size_t kappa = 1;
    std::vector<std::size_t> block_pool;
    std::size_t leader = 0;
    QuerySet current;
};

/// Fresh state with unit weights, uniform probabilities and
/// kappa = ceil((d-1)/(d_query-1)) (1 when d_query = 1).
WeightState make_weight_state(std::size_t d, std::size_t d_query, double theta1, double theta2);

std::size_t block_length(std::size_t d, std::size_t d_query);

/// p_i = (1 - theta1) w_i / sum w + theta1 / d.
void recompute_global_p(WeightState& ws);

/// Single-sub-state update: multiplies w_chosen by exp(theta1 R / (d p_chosen)),
/// then recomputes p. Throws ParameterError when R lies outside [0, horizon].
void optll_update(WeightState& ws, std::size_t chosen, double episode_reward, std::size_t horizon);

/// One finished episode of a block: the query set used and its reward.
struct BlockEpisode {
    QuerySet query;
    double reward = 0.0;
};

/// Block-start update. Episode k (1-based) must open a block, i.e.
/// (k - 1) mod kappa == 0, otherwise ScheduleError. Each sub-state queried in
/// the finished block has its weight multiplied by
/// exp((d-1) theta1 / (d (d_query-1)) * sum of rewards of episodes querying it).
void opmll_global_update(WeightState& ws, std::size_t k, const std::vector<BlockEpisode>& block,
                         std::size_t d_query, std::size_t horizon);

/// Starts a block: draws the leader from global p, refills the supporter pool
/// with every other sub-state and copies global weights into the local ones.
void opmll_start_block(WeightState& ws, SampleRng& rng);

/// Leader plus d_query - 1 supporters drawn without replacement from the pool.
/// When the pool runs short, the remainder is drawn from a refilled pool that
/// excludes the leader and the supporters already taken. Sets ws.current and
/// recomputes local_p for it. Throws ParameterError when d_query = 1.
QuerySet opmll_select_supporting(WeightState& ws, std::size_t leader, std::size_t d_query,
                                 SampleRng& rng);

/// Multiplies local weights of the current query set by exp(theta2 R / d_query)
/// and recomputes local_p over that set.
void opmll_local_update(WeightState& ws, double episode_reward, std::size_t horizon);

/// p~_i = (1 - theta2) w~_i / sum_{j in q} w~_j + theta2 / d_query over ws.current.
void recompute_local_p(WeightState& ws);

/// Default rates: theta1 = sqrt(d ln d / (H^2 K)) clamped to (0, 1], and
/// theta2 = 16 (d-1)/(d_query-1) theta1 clamped to 1.
double default_theta1(std::size_t d, std::size_t horizon, std::size_t episodes);
double default_theta2(std::size_t d, std::size_t d_query, double theta1);

} // namespace hsilab::agents
