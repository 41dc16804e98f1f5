#pragma once

#include "hsilab/core/trace.hpp"
#include "hsilab/core/types.hpp"
#include "hsilab/envs/model.hpp"
#include "hsilab/envs/sampling.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <string>

namespace hsilab::agents {

/// What the agent commits to at one step, before any feedback about s_h.
struct Decision {
    std::size_t action = 0;
    QuerySet query;
};

/// Invariant counters kept by the learners; all violation counts must stay 0.
struct InvariantStats {
    std::size_t checks = 0;
    std::size_t floor_violations = 0;
    std::size_t clamp_violations = 0;
    std::size_t count_violations = 0;
    std::size_t blocks_completed = 0;
    std::size_t coverage_violations = 0;

    bool clean() const {
        return floor_violations == 0 && clamp_violations == 0 && count_violations == 0 &&
               coverage_violations == 0;
    }
};

/// Episodic agent driven by run_episode. The agent never sees the hidden state;
/// it only receives Feedback after each decision.
class Agent {
public:
    virtual ~Agent() = default;

    virtual std::string name() const = 0;
    /// Episode index k is 1-based.
    virtual void begin_episode(std::size_t k) = 0;
    virtual Decision decide(std::size_t step) = 0;
    virtual void observe(std::size_t step, const Feedback& feedback) = 0;
    virtual void end_episode(const EpisodeTrace& trace) = 0;

    /// Exact expected return of the policy fixed at begin_episode, evaluated on
    /// `truth`. Agents whose policy cannot be evaluated return nullopt.
    virtual std::optional<double> policy_value(const envs::EnvModel& truth) const {
        (void)truth;
        return std::nullopt;
    }

    virtual const InvariantStats* invariants() const { return nullptr; }
};

/// Plays one episode: H steps of decide / act / feedback, then end_episode.
/// Environment randomness comes only from `streams`.
EpisodeTrace run_episode(Agent& agent, const envs::EnvModel& env, std::size_t k,
                         envs::EnvStreams& streams);

struct EvaluatedEpisode {
    EpisodeTrace trace;
    /// Agent's policy value on the environment, taken once the policy is fixed.
    std::optional<double> policy_value;
};

/// run_episode plus the exact value of the episode's policy.
EvaluatedEpisode run_evaluated_episode(Agent& agent, const envs::EnvModel& env, std::size_t k,
                                       envs::EnvStreams& streams);

/// Expected return of a policy that keeps query set `q` for the whole episode
/// and picks actions from (step, context) with the context rule of QTable.
double evaluate_reactive_policy(const envs::EnvModel& m, const QuerySet& q,
                                const std::function<std::size_t(std::size_t step, std::size_t ctx)>& act);

/// Expected return of a fixed open-loop action sequence.
double evaluate_action_sequence(const envs::EnvModel& m, const std::vector<std::size_t>& actions);

/// Expected return when every action is drawn uniformly at random.
double evaluate_uniform_policy(const envs::EnvModel& m);

} // namespace hsilab::agents
