#pragma once

#include "hsilab/agents/agent.hpp"
#include "hsilab/core/trace.hpp"
#include "hsilab/core/types.hpp"
#include "hsilab/envs/model.hpp"

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace hsilab::pors {

/// Log-likelihood of a trace that the candidate cannot produce.
inline constexpr double kImpossible = -std::numeric_limits<double>::infinity();

/// Candidate models share the EnvModel layout. Initial distribution and
/// rewards are treated as known and copied from the true environment.
envs::EnvModel with_known_parts(envs::EnvModel candidate, const envs::EnvModel& truth);

/// Shape of the feedback history tree. Nodes are numbered breadth-first; the
/// root (node 0) is step 1 and the children of node n are n*B+1 .. n*B+B, where
/// B = |S~|^d~ * max(O, 1) and child j = value_index * max(O, 1) + observation.
struct HistoryShape {
    std::size_t horizon = 0;
    std::size_t actions = 0;
    std::size_t queries = 0;
    std::size_t branching = 0;
    std::size_t observations = 0;
    std::size_t nodes = 0;

    static HistoryShape of(const Dims& dims, std::size_t observations);

    std::size_t choices() const noexcept { return actions * queries; }
    std::size_t child(std::size_t node, std::size_t value_index, std::optional<std::size_t> obs) const;
};

/// Deterministic policy over feedback histories. A choice packs
/// (action, query id) as action * queries + qid. Open-loop policies keep one
/// choice per step and ignore feedback.
struct PolicySpec {
    bool open_loop = false;
    std::vector<std::size_t> choices;

    std::size_t choice(std::size_t step, std::size_t node) const {
        return open_loop ? choices[step - 1] : choices[node];
    }
    friend bool operator==(const PolicySpec&, const PolicySpec&) = default;
};

inline constexpr std::uint64_t kDefaultPolicyCap = 1u << 16;

/// All policies of the searched family, indexed mixed-radix with node 0 (or
/// step 1 for open-loop) least significant.
class PolicySpace {
public:
    /// Full history-dependent family when it has at most `cap` members,
    /// otherwise the open-loop family (action sequence x per-step query).
    /// Throws SizeError when both exceed the cap.
    PolicySpace(const Dims& dims, std::size_t observations, std::uint64_t cap = kDefaultPolicyCap);

    std::size_t size() const noexcept { return size_; }
    bool restricted() const noexcept { return restricted_; }
    const HistoryShape& shape() const noexcept { return shape_; }
    PolicySpec at(std::size_t index) const;
    std::string family() const { return restricted_ ? "open-loop" : "history"; }

private:
    HistoryShape shape_;
    bool restricted_ = false;
    std::size_t slots_ = 0;
    std::size_t size_ = 0;
};

/// Exact log-probability of the trace's HSI and observations under the
/// candidate and policy, by forward filtering. Returns kImpossible for zero
/// probability. Throws ConsistencyError when the trace departs from the policy.
double feedback_log_likelihood(const envs::EnvModel& candidate, const HistoryShape& shape,
                               const PolicySpec& pi, const EpisodeTrace& trace);

struct ConfidenceSet {
    std::vector<std::size_t> members;
    double beta = 0.0;
    std::vector<double> loglik;

    bool contains(std::size_t c) const;
};

/// Candidates within beta of the best cumulative log-likelihood.
ConfidenceSet confidence_set_from(std::vector<double> loglik, double beta);

ConfidenceSet build_confidence_set(const std::vector<envs::EnvModel>& candidates,
                                   const std::vector<EpisodeTrace>& traces,
                                   const std::vector<PolicySpec>& policies, const HistoryShape& shape,
                                   double beta);

/// (|S~|^(d-d~) A + |S~| O) ln(|S~|^(d-d~) A O H K) + ln(K / delta), scaled by `c`.
double default_beta(const Dims& dims, std::size_t observations, std::size_t episodes, double delta,
                    double c = 1.0);

/// Exact expected total reward by forward enumeration over (history node,
/// hidden state). Throws SizeError when the history tree exceeds `node_cap`.
inline constexpr std::size_t kDefaultNodeCap = 1u << 20;
double evaluate_policy_value(const envs::EnvModel& m, const HistoryShape& shape, const PolicySpec& pi,
                             std::size_t node_cap = kDefaultNodeCap);

struct Plan {
    std::size_t candidate = 0;
    std::size_t policy = 0;
    double value = 0.0;
};

/// Argmax over (candidate in set, policy) of values[candidate][policy]; ties
/// go to the lowest (candidate, policy) pair.
Plan optimistic_plan(const ConfidenceSet& cs, const std::vector<std::vector<double>>& values);

struct PorsConfig {
    /// Negative selects default_beta.
    double beta = -1.0;
    double beta_scale = 1.0;
    double delta = 0.05;
    std::size_t episodes = 1000;
    std::uint64_t policy_cap = kDefaultPolicyCap;
};

/// Optimistic maximum-likelihood planner over a finite candidate class.
class PorsAgent final : public agents::Agent {
public:
    PorsAgent(const envs::EnvModel& truth, std::vector<envs::EnvModel> candidates, const PorsConfig& cfg);

    std::string name() const override { return "pors"; }
    void begin_episode(std::size_t k) override;
    agents::Decision decide(std::size_t step) override;
    void observe(std::size_t step, const Feedback& feedback) override;
    void end_episode(const EpisodeTrace& trace) override;
    std::optional<double> policy_value(const envs::EnvModel& truth) const override;

    const ConfidenceSet& confidence_set() const noexcept { return cs_; }
    const Plan& plan() const noexcept { return plan_; }
    const PolicySpace& space() const noexcept { return space_; }
    double beta() const noexcept { return beta_; }
    const std::vector<envs::EnvModel>& candidates() const noexcept { return candidates_; }
    /// values()[c][p]: exact value of policy p under candidate c.
    const std::vector<std::vector<double>>& values() const noexcept { return values_; }

private:
    Dims dims_;
    std::vector<QuerySet> queries_;
    std::vector<envs::EnvModel> candidates_;
    PolicySpace space_;
    double beta_ = 0.0;
    std::vector<std::vector<double>> values_;
    std::vector<double> loglik_;
    ConfidenceSet cs_;
    Plan plan_;
    PolicySpec policy_;
    std::size_t node_ = 0;
    std::size_t step_choice_ = 0;
    mutable std::vector<std::optional<double>> truth_cache_;
    mutable const envs::EnvModel* truth_owner_ = nullptr;
};

} // namespace hsilab::pors
