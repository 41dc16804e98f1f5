#include "hsilab/agents/agent.hpp"

#include "hsilab/core/errors.hpp"

namespace hsilab::agents {

using envs::EnvModel;

namespace {

EpisodeTrace play(Agent& agent, const EnvModel& env, std::size_t k, envs::EnvStreams& streams,
                  std::optional<double>* value_out) {
    const Dims& dims = env.dims;
    EpisodeTrace trace;
    trace.episode = k;
    trace.steps.reserve(dims.horizon);

    agent.begin_episode(k);
    if (value_out) *value_out = agent.policy_value(env);
    StateIndex s = envs::sample_initial(env, streams.init);
    for (std::size_t h = 1; h <= dims.horizon; ++h) {
        Decision dec = agent.decide(h);
        if (dec.action >= dims.actions) throw ParameterError(agent.name() + " chose an invalid action");
        if (dec.query.size() != dims.d_query) throw ParameterError(agent.name() + " chose an invalid query");

        Feedback fb;
        fb.reward = envs::sample_reward(env, h, s, dec.action, streams.reward);
        for (std::size_t i : dec.query.indices()) fb.hsi.push_back({i, substate_value(s.value, i, dims)});
        if (env.has_emissions())
            fb.observation = envs::emit_observation(env, h, s, dec.query, streams.emission);
        agent.observe(h, fb);

        trace.total += fb.reward;
        trace.steps.push_back({std::move(dec.query), dec.action, std::move(fb.hsi), fb.observation, fb.reward});
        if (h < dims.horizon) s = envs::transition(env, h, s, trace.steps.back().action, streams.transition);
    }
    agent.end_episode(trace);
    return trace;
}

} // namespace

EpisodeTrace run_episode(Agent& agent, const EnvModel& env, std::size_t k, envs::EnvStreams& streams) {
    return play(agent, env, k, streams, nullptr);
}

EvaluatedEpisode run_evaluated_episode(Agent& agent, const EnvModel& env, std::size_t k,
                                       envs::EnvStreams& streams) {
    EvaluatedEpisode out;
    out.trace = play(agent, env, k, streams, &out.policy_value);
    return out;
}

double evaluate_reactive_policy(const EnvModel& m, const QuerySet& q,
                                const std::function<std::size_t(std::size_t, std::size_t)>& act) {
    const Dims& dims = m.dims;
    const std::size_t S = m.state_count();
    const std::size_t C = 1 + dims.query_value_count() * dims.actions;

    std::vector<std::size_t> qval(S);
    for (std::size_t s = 0; s < S; ++s) qval[s] = query_value_index(s, q, dims);

    // joint distribution over (state, context), context-major
    std::vector<double> cur(S * C, 0.0), nxt(S * C, 0.0);
    for (std::size_t s = 0; s < S; ++s) cur[s] = m.initial[s];

    double value = 0.0;
    for (std::size_t h = 1; h <= dims.horizon; ++h) {
        std::fill(nxt.begin(), nxt.end(), 0.0);
        for (std::size_t c = 0; c < C; ++c) {
            const std::size_t a = act(h, c);
            for (std::size_t s = 0; s < S; ++s) {
                const double w = cur[c * S + s];
                if (w == 0.0) continue;
                value += w * m.reward_mean(h, s, a);
                if (h == dims.horizon) continue;
                const std::size_t c2 = 1 + qval[s] * dims.actions + a;
                for (const auto& e : m.next(h, s, a)) nxt[c2 * S + e.next] += w * e.prob;
            }
        }
        cur.swap(nxt);
    }
    return value;
}

double evaluate_action_sequence(const EnvModel& m, const std::vector<std::size_t>& actions) {
    const Dims& dims = m.dims;
    if (actions.size() != dims.horizon) throw ParameterError("action sequence must have length H");
    const std::size_t S = m.state_count();
    std::vector<double> cur = m.initial, nxt(S);
    double value = 0.0;
    for (std::size_t h = 1; h <= dims.horizon; ++h) {
        const std::size_t a = actions[h - 1];
        std::fill(nxt.begin(), nxt.end(), 0.0);
        for (std::size_t s = 0; s < S; ++s) {
            if (cur[s] == 0.0) continue;
            value += cur[s] * m.reward_mean(h, s, a);
            if (h < dims.horizon)
                for (const auto& e : m.next(h, s, a)) nxt[e.next] += cur[s] * e.prob;
        }
        cur.swap(nxt);
    }
    return value;
}

double evaluate_uniform_policy(const EnvModel& m) {
    const Dims& dims = m.dims;
    const std::size_t S = m.state_count();
    const double pa = 1.0 / static_cast<double>(dims.actions);
    std::vector<double> cur = m.initial, nxt(S);
    double value = 0.0;
    for (std::size_t h = 1; h <= dims.horizon; ++h) {
        std::fill(nxt.begin(), nxt.end(), 0.0);
        for (std::size_t s = 0; s < S; ++s) {
            if (cur[s] == 0.0) continue;
            for (std::size_t a = 0; a < dims.actions; ++a) {
                const double w = cur[s] * pa;
                value += w * m.reward_mean(h, s, a);
                if (h < dims.horizon)
                    for (const auto& e : m.next(h, s, a)) nxt[e.next] += w * e.prob;
            }
        }
        cur.swap(nxt);
    }
    return value;
}

} // namespace hsilab::agents
