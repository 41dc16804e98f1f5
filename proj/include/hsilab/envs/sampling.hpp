#pragma once

#include "hsilab/core/rng.hpp"
#include "hsilab/core/types.hpp"
#include "hsilab/envs/model.hpp"

#include <cstdint>

namespace hsilab::envs {

StateIndex sample_initial(const EnvModel& m, SampleRng& rng);

/// Draws s' ~ P_h(. | s, a). Product-form models sample each sub-state from
/// its own kernel. Throws RangeError when h is not in [1, H-1].
StateIndex transition(const EnvModel& m, std::size_t step, StateIndex s, std::size_t a,
                      SampleRng& rng);

/// Same, but always through the expanded joint table.
StateIndex transition_joint(const EnvModel& m, std::size_t step, StateIndex s, std::size_t a,
                            SampleRng& rng);

/// Bernoulli draw of the reward mean r_h(s, a).
double sample_reward(const EnvModel& m, std::size_t step, StateIndex s, std::size_t a,
                     SampleRng& rng);

/// Observation o ~ O_h^q(. | unqueried values of s).
/// Throws UnsupportedFeedbackError on models without emissions.
std::size_t emit_observation(const EnvModel& m, std::size_t step, StateIndex s,
                             const QuerySet& q, SampleRng& rng);

/// The four environment streams of one run, derived from a single seed.
struct EnvStreams {
    explicit EnvStreams(std::uint64_t seed)
        : init(seed, Stream::Init), transition(seed, Stream::Transition),
          reward(seed, Stream::Reward), emission(seed, Stream::Emission) {}

    SampleRng init;
    SampleRng transition;
    SampleRng reward;
    SampleRng emission;
};

} // namespace hsilab::envs
