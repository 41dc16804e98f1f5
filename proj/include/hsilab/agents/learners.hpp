#pragma once

#include "hsilab/agents/agent.hpp"
#include "hsilab/agents/qtable.hpp"
#include "hsilab/agents/weights.hpp"
#include "hsilab/core/rng.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace hsilab::agents {

struct LearnerConfig {
    /// 0 selects default_theta1(d, H, episodes).
    double theta1 = 0.0;
    /// 0 selects default_theta2(d, d_query, theta1).
    double theta2 = 0.0;
    double c_bonus = 1.0;
    /// Planned number of episodes K, used by the default rates.
    std::size_t episodes = 1000;
};

/// Shared Q-learning layer: greedy decisions over (step, query id, context) and
/// per-query caches of the exact policy value.
class OptimisticQLayer {
public:
    OptimisticQLayer(const Dims& dims, double c_bonus);

    void start(std::size_t qid);
    std::size_t decide(std::size_t step);
    /// Records feedback for the action returned by the last decide().
    void observe(std::size_t step, const Feedback& fb);
    /// Refreshes Q for the query used this episode.
    void finish();

    double greedy_value(const envs::EnvModel& truth, std::size_t qid) const;
    /// Optimistic V_1 for the current query, captured at start().
    double start_value() const noexcept { return start_value_; }

    const QTable& table() const noexcept { return table_; }
    const std::vector<QuerySet>& queries() const noexcept { return queries_; }
    std::size_t current_qid() const noexcept { return qid_; }

private:
    Dims dims_;
    std::vector<QuerySet> queries_;
    QTable table_;
    std::size_t qid_ = 0;
    std::size_t ctx_ = 0;
    std::size_t last_action_ = 0;
    double start_value_ = 0.0;
    mutable std::vector<std::optional<double>> value_cache_;
    mutable const envs::EnvModel* cache_owner_ = nullptr;
};

/// Two-layer learner for d_query = 1: importance-weighted exponential weights
/// pick the queried sub-state once per episode; optimistic Q picks actions.
class OpTllAgent final : public Agent {
public:
    OpTllAgent(const Dims& dims, const LearnerConfig& cfg, std::uint64_t seed);

    std::string name() const override { return "optll"; }
    void begin_episode(std::size_t k) override;
    Decision decide(std::size_t step) override;
    void observe(std::size_t step, const Feedback& feedback) override;
    void end_episode(const EpisodeTrace& trace) override;
    std::optional<double> policy_value(const envs::EnvModel& truth) const override;
    const InvariantStats* invariants() const override { return &stats_; }

    const WeightState& weights() const noexcept { return ws_; }
    const OptimisticQLayer& q_layer() const noexcept { return q_; }
    std::size_t chosen() const noexcept { return chosen_; }

private:
    void check_invariants();

    Dims dims_;
    WeightState ws_;
    OptimisticQLayer q_;
    SampleRng rng_;
    std::size_t chosen_ = 0;
    InvariantStats stats_;
};

/// Three-layer learner for d_query > 1: a leader drawn per block of kappa
/// episodes from global weights, supporters rotated without replacement, local
/// weights updated per episode, and optimistic Q over the chosen query set.
class OpMllAgent final : public Agent {
public:
    OpMllAgent(const Dims& dims, const LearnerConfig& cfg, std::uint64_t seed);

    std::string name() const override { return "opmll"; }
    void begin_episode(std::size_t k) override;
    Decision decide(std::size_t step) override;
    void observe(std::size_t step, const Feedback& feedback) override;
    void end_episode(const EpisodeTrace& trace) override;
    std::optional<double> policy_value(const envs::EnvModel& truth) const override;
    const InvariantStats* invariants() const override { return &stats_; }

    const WeightState& weights() const noexcept { return ws_; }
    const OptimisticQLayer& q_layer() const noexcept { return q_; }
    /// Sub-state drawn from the local probabilities this episode (recorded only).
    std::size_t rewarding_substate() const noexcept { return rewarding_; }

private:
    void check_invariants();

    Dims dims_;
    WeightState ws_;
    OptimisticQLayer q_;
    SampleRng rng_;
    std::vector<BlockEpisode> block_;
    std::vector<bool> supported_;
    std::size_t rewarding_ = 0;
    InvariantStats stats_;
};

} // namespace hsilab::agents
