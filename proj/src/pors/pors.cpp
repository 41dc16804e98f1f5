#include "hsilab/pors/pors.hpp"

#include "hsilab/core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hsilab::pors {

using envs::EnvModel;

EnvModel with_known_parts(EnvModel candidate, const EnvModel& truth) {
    if (!(candidate.dims == truth.dims)) throw ConsistencyError("candidate dimensions differ from the environment");
    if (candidate.observations != truth.observations)
        throw ConsistencyError("candidate observation count differs from the environment");
    candidate.initial = truth.initial;
    candidate.rewards = truth.rewards;
    envs::validate_model(candidate);
    return candidate;
}

HistoryShape HistoryShape::of(const Dims& dims, std::size_t observations) {
    HistoryShape s;
    s.horizon = dims.horizon;
    s.actions = dims.actions;
    s.queries = enumerate_query_sets(dims).size();
    s.observations = observations;
    s.branching = checked_pow(dims.alphabet, dims.d_query) * std::max<std::size_t>(observations, 1);
    // saturating sum of B^0 .. B^(H-1)
    constexpr std::size_t kMax = std::numeric_limits<std::size_t>::max();
    std::size_t layer = 1, total = 0;
    for (std::size_t h = 0; h < dims.horizon; ++h) {
        total = total > kMax - layer ? kMax : total + layer;
        layer = layer > kMax / s.branching ? kMax : layer * s.branching;
    }
    s.nodes = total;
    return s;
}

std::size_t HistoryShape::child(std::size_t node, std::size_t value_index, std::optional<std::size_t> obs) const {
    return node * branching + 1 + value_index * std::max<std::size_t>(observations, 1) + obs.value_or(0);
}

namespace {

// choices^slots, or nullopt when it exceeds cap
std::optional<std::size_t> family_size(std::size_t choices, std::size_t slots, std::uint64_t cap) {
    std::uint64_t n = 1;
    for (std::size_t k = 0; k < slots; ++k) {
        if (n > cap / choices) return std::nullopt;
        n *= choices;
    }
    return static_cast<std::size_t>(n);
}

} // namespace

PolicySpace::PolicySpace(const Dims& dims, std::size_t observations, std::uint64_t cap)
    : shape_(HistoryShape::of(dims, observations)) {
    if (cap == 0) throw ParameterError("policy cap must be positive");
    if (auto n = family_size(shape_.choices(), shape_.nodes, cap)) {
        slots_ = shape_.nodes;
        size_ = *n;
        return;
    }
    if (auto n = family_size(shape_.choices(), shape_.horizon, cap)) {
        restricted_ = true;
        slots_ = shape_.horizon;
        size_ = *n;
        return;
    }
    throw SizeError("policy space exceeds the cap even for open-loop policies");
}

PolicySpec PolicySpace::at(std::size_t index) const {
    if (index >= size_) throw RangeError("policy index out of range");
    PolicySpec pi;
    pi.open_loop = restricted_;
    pi.choices.resize(slots_);
    for (std::size_t k = 0; k < slots_; ++k) {
        pi.choices[k] = index % shape_.choices();
        index /= shape_.choices();
    }
    return pi;
}

double feedback_log_likelihood(const EnvModel& candidate, const HistoryShape& shape, const PolicySpec& pi,
                               const EpisodeTrace& trace) {
    const Dims& dims = candidate.dims;
    if (trace.steps.size() != dims.horizon) throw ConsistencyError("trace length differs from the horizon");
    const std::vector<QuerySet> queries = enumerate_query_sets(dims);
    const std::size_t S = candidate.state_count();

    std::vector<double> alpha = candidate.initial, next(S);
    double loglik = 0.0;
    std::size_t node = 0;
    for (std::size_t h = 1; h <= dims.horizon; ++h) {
        const StepRecord& rec = trace.steps[h - 1];
        const std::size_t choice = pi.choice(h, node);
        const std::size_t a = choice / shape.queries, qid = choice % shape.queries;
        const QuerySet& q = queries[qid];
        if (rec.action != a || !(rec.query == q)) throw ConsistencyError("trace departs from the policy");
        if (rec.hsi.size() != q.size()) throw ConsistencyError("HSI does not match the query set");
        for (std::size_t k = 0; k < q.size(); ++k)
            if (rec.hsi[k].index != q[k]) throw ConsistencyError("HSI does not match the query set");
        if (candidate.has_emissions() != rec.observation.has_value())
            throw ConsistencyError("observation presence does not match the model");

        double mass = 0.0;
        for (std::size_t s = 0; s < S; ++s) {
            if (alpha[s] == 0.0) continue;
            bool consistent = true;
            for (const auto& e : rec.hsi)
                if (substate_value(s, e.index, dims) != e.value) consistent = false;
            double w = consistent ? alpha[s] : 0.0;
            if (w != 0.0 && candidate.has_emissions())
                w *= candidate.emission(h, qid, *rec.observation, unqueried_value_index(s, q, dims));
            alpha[s] = w;
            mass += w;
        }
        if (!(mass > 0.0)) return kImpossible;
        loglik += std::log(mass);
        if (h == dims.horizon) break;

        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t s = 0; s < S; ++s) {
            if (alpha[s] == 0.0) continue;
            const double w = alpha[s] / mass;
            for (const auto& e : candidate.next(h, s, a)) next[e.next] += w * e.prob;
        }
        alpha.swap(next);
        if (!pi.open_loop) node = shape.child(node, query_value_index(rec.hsi, dims.alphabet), rec.observation);
    }
    return loglik;
}

bool ConfidenceSet::contains(std::size_t c) const {
    return std::binary_search(members.begin(), members.end(), c);
}

ConfidenceSet confidence_set_from(std::vector<double> loglik, double beta) {
    if (loglik.empty()) throw ConfigError("candidate class is empty");
    if (!(beta >= 0.0)) throw ParameterError("beta must be non-negative");
    ConfidenceSet cs;
    cs.beta = beta;
    const double best = *std::max_element(loglik.begin(), loglik.end());
    for (std::size_t c = 0; c < loglik.size(); ++c)
        if (loglik[c] == best || loglik[c] >= best - beta) cs.members.push_back(c);
    cs.loglik = std::move(loglik);
    return cs;
}

ConfidenceSet build_confidence_set(const std::vector<EnvModel>& candidates, const std::vector<EpisodeTrace>& traces,
                                   const std::vector<PolicySpec>& policies, const HistoryShape& shape, double beta) {
    if (candidates.empty()) throw ConfigError("candidate class is empty");
    if (traces.size() != policies.size()) throw ConsistencyError("one policy per trace is required");
    std::vector<double> loglik(candidates.size(), 0.0);
    for (std::size_t c = 0; c < candidates.size(); ++c)
        for (std::size_t t = 0; t < traces.size() && loglik[c] != kImpossible; ++t)
            loglik[c] += feedback_log_likelihood(candidates[c], shape, policies[t], traces[t]);
    return confidence_set_from(std::move(loglik), beta);
}

double default_beta(const Dims& dims, std::size_t observations, std::size_t episodes, double delta, double c) {
    if (episodes == 0) throw ParameterError("episode count must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0, 1)");
    const double hidden = std::pow(static_cast<double>(dims.alphabet), static_cast<double>(dims.d - dims.d_query));
    const double A = static_cast<double>(dims.actions);
    const double O = static_cast<double>(std::max<std::size_t>(observations, 1));
    const double alphabet = static_cast<double>(dims.alphabet);
    const double K = static_cast<double>(episodes);
    const double H = static_cast<double>(dims.horizon);
    return c * ((hidden * A + alphabet * O) * std::log(hidden * A * O * H * K) + std::log(K / delta));
}

double evaluate_policy_value(const EnvModel& m, const HistoryShape& shape, const PolicySpec& pi,
                             std::size_t node_cap) {
    const Dims& dims = m.dims;
    if (pi.open_loop) {
        std::vector<std::size_t> actions;
        for (std::size_t c : pi.choices) actions.push_back(c / shape.queries);
        return agents::evaluate_action_sequence(m, actions);
    }
    if (shape.nodes > node_cap) throw SizeError("history tree exceeds the node cap");
    if (pi.choices.size() != shape.nodes) throw ConsistencyError("policy does not match the history tree");

    const std::vector<QuerySet> queries = enumerate_query_sets(dims);
    const std::size_t S = m.state_count();
    const std::size_t O = std::max<std::size_t>(m.observations, 1);
    std::vector<std::vector<std::size_t>> qval(queries.size(), std::vector<std::size_t>(S));
    std::vector<std::vector<std::size_t>> uval(queries.size(), std::vector<std::size_t>(S));
    for (std::size_t qid = 0; qid < queries.size(); ++qid)
        for (std::size_t s = 0; s < S; ++s) {
            qval[qid][s] = query_value_index(s, queries[qid], dims);
            uval[qid][s] = unqueried_value_index(s, queries[qid], dims);
        }

    // joint mass over (node in layer, hidden state)
    std::vector<double> cur = m.initial, nxt;
    std::size_t first = 0, width = 1;
    double value = 0.0;
    for (std::size_t h = 1; h <= dims.horizon; ++h) {
        const bool last = h == dims.horizon;
        if (!last) nxt.assign(width * shape.branching * S, 0.0);
        for (std::size_t l = 0; l < width; ++l) {
            const std::size_t choice = pi.choices[first + l];
            const std::size_t a = choice / shape.queries, qid = choice % shape.queries;
            for (std::size_t s = 0; s < S; ++s) {
                const double w = cur[l * S + s];
                if (w == 0.0) continue;
                value += w * m.reward_mean(h, s, a);
                if (last) continue;
                for (std::size_t o = 0; o < O; ++o) {
                    const double e = m.has_emissions() ? m.emission(h, qid, o, uval[qid][s]) : 1.0;
                    if (e == 0.0) continue;
                    const std::size_t child = l * shape.branching + qval[qid][s] * O + o;
                    for (const auto& t : m.next(h, s, a)) nxt[child * S + t.next] += w * e * t.prob;
                }
            }
        }
        if (last) break;
        cur.swap(nxt);
        first = first * shape.branching + 1;
        width *= shape.branching;
    }
    return value;
}

Plan optimistic_plan(const ConfidenceSet& cs, const std::vector<std::vector<double>>& values) {
    if (cs.members.empty()) throw ParameterError("confidence set is empty");
    Plan best;
    bool found = false;
    for (std::size_t c : cs.members) {
        if (c >= values.size()) throw RangeError("candidate index out of range");
        if (values[c].empty()) throw ConfigError("policy space is empty");
        for (std::size_t p = 0; p < values[c].size(); ++p)
            if (!found || values[c][p] > best.value) {
                best = {c, p, values[c][p]};
                found = true;
            }
    }
    return best;
}

PorsAgent::PorsAgent(const EnvModel& truth, std::vector<EnvModel> candidates, const PorsConfig& cfg)
    : dims_(truth.dims), queries_(enumerate_query_sets(truth.dims)),
      space_(truth.dims, truth.observations, cfg.policy_cap) {
    if (candidates.empty()) throw ConfigError("candidate class is empty");
    if (!truth.has_emissions()) throw UnsupportedFeedbackError("PORS requires a model with emissions");
    for (auto& c : candidates) candidates_.push_back(with_known_parts(std::move(c), truth));
    beta_ = cfg.beta >= 0.0 ? cfg.beta
                            : default_beta(dims_, truth.observations, cfg.episodes, cfg.delta, cfg.beta_scale);
    values_.assign(candidates_.size(), std::vector<double>(space_.size()));
    for (std::size_t p = 0; p < space_.size(); ++p) {
        const PolicySpec pi = space_.at(p);
        for (std::size_t c = 0; c < candidates_.size(); ++c)
            values_[c][p] = evaluate_policy_value(candidates_[c], space_.shape(), pi);
    }
    loglik_.assign(candidates_.size(), 0.0);
}

void PorsAgent::begin_episode(std::size_t) {
    cs_ = confidence_set_from(loglik_, beta_);
    plan_ = optimistic_plan(cs_, values_);
    policy_ = space_.at(plan_.policy);
    node_ = 0;
}

agents::Decision PorsAgent::decide(std::size_t step) {
    step_choice_ = policy_.choice(step, node_);
    return {step_choice_ / space_.shape().queries, queries_[step_choice_ % space_.shape().queries]};
}

void PorsAgent::observe(std::size_t step, const Feedback& fb) {
    if (policy_.open_loop || step == dims_.horizon) return;
    node_ = space_.shape().child(node_, query_value_index(fb.hsi, dims_.alphabet), fb.observation);
}

void PorsAgent::end_episode(const EpisodeTrace& trace) {
    for (std::size_t c = 0; c < candidates_.size(); ++c) {
        if (loglik_[c] == kImpossible) continue;
        loglik_[c] += feedback_log_likelihood(candidates_[c], space_.shape(), policy_, trace);
    }
}

std::optional<double> PorsAgent::policy_value(const EnvModel& truth) const {
    if (truth_owner_ != &truth) {
        truth_cache_.assign(space_.size(), std::nullopt);
        truth_owner_ = &truth;
    }
    auto& slot = truth_cache_[plan_.policy];
    if (!slot) slot = evaluate_policy_value(truth, space_.shape(), policy_);
    return slot;
}

} // namespace hsilab::pors
