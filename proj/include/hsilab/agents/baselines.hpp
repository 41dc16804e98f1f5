#pragma once

#include "hsilab/agents/agent.hpp"
#include "hsilab/core/rng.hpp"

#include <cstdint>
#include <vector>

namespace hsilab::agents {

/// Uniform random action and uniform random query set at every step.
class UniformRandomAgent final : public Agent {
public:
    UniformRandomAgent(const Dims& dims, std::uint64_t seed);

    std::string name() const override { return "uniform"; }
    void begin_episode(std::size_t) override {}
    Decision decide(std::size_t step) override;
    void observe(std::size_t, const Feedback&) override {}
    void end_episode(const EpisodeTrace&) override {}
    std::optional<double> policy_value(const envs::EnvModel& truth) const override;

private:
    std::vector<QuerySet> queries_;
    std::size_t actions_;
    SampleRng rng_;
};

/// Plays a fixed open-loop action sequence with a fixed query set.
class FixedSequenceAgent final : public Agent {
public:
    FixedSequenceAgent(const Dims& dims, std::vector<std::size_t> actions, QuerySet query);

    std::string name() const override { return "fixed"; }
    void begin_episode(std::size_t) override {}
    Decision decide(std::size_t step) override;
    void observe(std::size_t, const Feedback&) override {}
    void end_episode(const EpisodeTrace&) override {}
    std::optional<double> policy_value(const envs::EnvModel& truth) const override;

private:
    std::vector<std::size_t> actions_;
    QuerySet query_;
};

/// Treats each of the A^H open-loop action sequences as an arm. Unplayed arms
/// are tried first in index order; afterwards a uniform arm is explored with
/// probability `explore`, otherwise the best empirical mean is played.
/// Arm index is mixed-radix over steps, step 1 least significant.
class EpsilonGreedySequenceAgent final : public Agent {
public:
    EpsilonGreedySequenceAgent(const Dims& dims, double explore, std::uint64_t seed);

    std::string name() const override { return "eps-sequence"; }
    void begin_episode(std::size_t k) override;
    Decision decide(std::size_t step) override;
    void observe(std::size_t, const Feedback&) override {}
    void end_episode(const EpisodeTrace& trace) override;
    std::optional<double> policy_value(const envs::EnvModel& truth) const override;

    std::size_t arm_count() const noexcept { return counts_.size(); }
    /// Arm the greedy rule would play now (lowest unplayed arm if any remain).
    std::size_t greedy_arm() const;
    /// Arm with the best empirical mean among played arms, ties to the lowest index.
    std::size_t best_empirical_arm() const;
    std::vector<std::size_t> arm_actions(std::size_t arm) const;
    std::size_t arm_of(const std::vector<std::size_t>& actions) const;

private:
    std::size_t horizon_;
    std::size_t actions_;
    double explore_;
    QuerySet query_;
    SampleRng rng_;
    std::vector<std::uint64_t> counts_;
    std::vector<double> sums_;
    std::size_t arm_ = 0;
    mutable std::vector<double> arm_values_;
    mutable const envs::EnvModel* values_owner_ = nullptr;
};

} // namespace hsilab::agents
