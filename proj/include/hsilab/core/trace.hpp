#pragma once

#include "hsilab/core/types.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace hsilab {

/// What happened at one step of an episode, as seen by the agent.
struct StepRecord {
    QuerySet query;
    std::size_t action = 0;
    std::vector<HsiEntry> hsi;
    std::optional<std::size_t> observation;
    double reward = 0.0;
};

/// One episode of feedback. `steps` has length H and `total` is the reward sum.
struct EpisodeTrace {
    std::size_t episode = 0;
    std::vector<StepRecord> steps;
    double total = 0.0;
};

} // namespace hsilab
