#include "hsilab/agents/baselines.hpp"

#include "hsilab/core/errors.hpp"

namespace hsilab::agents {

UniformRandomAgent::UniformRandomAgent(const Dims& dims, std::uint64_t seed)
    : queries_(enumerate_query_sets(dims)), actions_(dims.actions), rng_(seed, Stream::Agent) {}

Decision UniformRandomAgent::decide(std::size_t) {
    const std::size_t a = rng_.uniform_index(actions_);
    return {a, queries_[rng_.uniform_index(queries_.size())]};
}

std::optional<double> UniformRandomAgent::policy_value(const envs::EnvModel& truth) const {
    return evaluate_uniform_policy(truth);
}

FixedSequenceAgent::FixedSequenceAgent(const Dims& dims, std::vector<std::size_t> actions, QuerySet query)
    : actions_(std::move(actions)), query_(std::move(query)) {
    if (actions_.size() != dims.horizon) throw ParameterError("fixed sequence must have length H");
    for (std::size_t a : actions_)
        if (a >= dims.actions) throw ParameterError("fixed sequence action out of range");
    if (query_.size() != dims.d_query) throw ParameterError("fixed query has wrong size");
}

Decision FixedSequenceAgent::decide(std::size_t step) { return {actions_[step - 1], query_}; }

std::optional<double> FixedSequenceAgent::policy_value(const envs::EnvModel& truth) const {
    return evaluate_action_sequence(truth, actions_);
}

EpsilonGreedySequenceAgent::EpsilonGreedySequenceAgent(const Dims& dims, double explore, std::uint64_t seed)
    : horizon_(dims.horizon), actions_(dims.actions), explore_(explore),
      query_(enumerate_query_sets(dims).front()), rng_(seed, Stream::Agent) {
    if (!(explore >= 0.0 && explore <= 1.0)) throw ParameterError("explore rate must lie in [0, 1]");
    const std::size_t arms = checked_pow(actions_, horizon_);
    if (arms > (std::size_t{1} << 20)) throw SizeError("too many action sequences");
    counts_.assign(arms, 0);
    sums_.assign(arms, 0.0);
}

std::size_t EpsilonGreedySequenceAgent::best_empirical_arm() const {
    std::size_t best = 0;
    double best_mean = -1.0;
    for (std::size_t i = 0; i < counts_.size(); ++i) {
        if (counts_[i] == 0) continue;
        const double m = sums_[i] / static_cast<double>(counts_[i]);
        if (m > best_mean) {
            best_mean = m;
            best = i;
        }
    }
    return best;
}

std::size_t EpsilonGreedySequenceAgent::greedy_arm() const {
    for (std::size_t i = 0; i < counts_.size(); ++i)
        if (counts_[i] == 0) return i;
    return best_empirical_arm();
}

void EpsilonGreedySequenceAgent::begin_episode(std::size_t) {
    // one draw per episode keeps the stream aligned
    const double u = rng_.uniform();
    const std::size_t random_arm = rng_.uniform_index(counts_.size());
    arm_ = u < explore_ ? random_arm : greedy_arm();
}

Decision EpsilonGreedySequenceAgent::decide(std::size_t step) {
    std::size_t arm = arm_;
    for (std::size_t h = 1; h < step; ++h) arm /= actions_;
    return {arm % actions_, query_};
}

void EpsilonGreedySequenceAgent::end_episode(const EpisodeTrace& trace) {
    ++counts_[arm_];
    sums_[arm_] += trace.total;
}

std::vector<std::size_t> EpsilonGreedySequenceAgent::arm_actions(std::size_t arm) const {
    std::vector<std::size_t> out;
    for (std::size_t h = 0; h < horizon_; ++h) {
        out.push_back(arm % actions_);
        arm /= actions_;
    }
    return out;
}

std::size_t EpsilonGreedySequenceAgent::arm_of(const std::vector<std::size_t>& actions) const {
    std::size_t arm = 0;
    for (std::size_t h = actions.size(); h-- > 0;) arm = arm * actions_ + actions[h];
    return arm;
}

std::optional<double> EpsilonGreedySequenceAgent::policy_value(const envs::EnvModel& truth) const {
    if (values_owner_ != &truth) {
        arm_values_.clear();
        for (std::size_t i = 0; i < counts_.size(); ++i)
            arm_values_.push_back(evaluate_action_sequence(truth, arm_actions(i)));
        values_owner_ = &truth;
    }
    double mean = 0.0;
    for (double v : arm_values_) mean += v;
    mean /= static_cast<double>(arm_values_.size());
    return (1.0 - explore_) * arm_values_[greedy_arm()] + explore_ * mean;
}

} // namespace hsilab::agents
