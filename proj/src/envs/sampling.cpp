#include "hsilab/envs/sampling.hpp"

#include "hsilab/core/errors.hpp"

namespace hsilab::envs {

StateIndex sample_initial(const EnvModel& m, SampleRng& rng) {
    return {rng.categorical(m.initial)};
}

StateIndex transition_joint(const EnvModel& m, std::size_t step, StateIndex s, std::size_t a,
                            SampleRng& rng) {
    const auto row = m.next(step, s.value, a);
    if (row.size() == 1) return {row[0].next};
    const double u = rng.uniform();
    double acc = 0.0;
    for (const auto& e : row) {
        acc += e.prob;
        if (u < acc) return {e.next};
    }
    return {row.back().next};
}

StateIndex transition(const EnvModel& m, std::size_t step, StateIndex s, std::size_t a,
                      SampleRng& rng) {
    if (step < 1 || step >= m.dims.horizon)
        throw RangeError("no transition at step " + std::to_string(step));
    if (!m.product) return transition_joint(m, step, s, a, rng);

    const Dims& dims = m.dims;
    std::size_t next = 0;
    std::size_t place = 1;
    for (std::size_t i = 0; i < dims.d; ++i) {
        const auto r = m.product->row(step, i, substate_value(s.value, i, dims), a);
        next += rng.categorical(r) * place;
        place *= dims.alphabet;
    }
    return {next};
}

double sample_reward(const EnvModel& m, std::size_t step, StateIndex s, std::size_t a,
                     SampleRng& rng) {
    const double mean = m.reward_mean(step, s.value, a);
    // draw unconditionally so the stream position does not depend on the mean
    const bool hit = rng.bernoulli(mean);
    return hit ? 1.0 : 0.0;
}

std::size_t emit_observation(const EnvModel& m, std::size_t step, StateIndex s,
                             const QuerySet& q, SampleRng& rng) {
    if (!m.has_emissions())
        throw UnsupportedFeedbackError("model '" + m.name + "' has no emissions");
    const std::size_t qid = query_set_id(q, m.dims);
    const std::size_t u = unqueried_value_index(s.value, q, m.dims);
    const double x = rng.uniform();
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t o = 0; o < m.observations; ++o) {
        const double p = m.emission(step, qid, o, u);
        if (p <= 0.0) continue;
        acc += p;
        last = o;
        if (x < acc) return o;
    }
    return last;
}

} // namespace hsilab::envs
