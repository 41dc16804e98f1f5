#pragma once

#include "hsilab/core/rng.hpp"
#include "hsilab/envs/model.hpp"

#include <cstddef>

namespace hsilab::envs {

enum class CovarianceMode {
    /// Exact from the joint table (always available for an EnvModel).
    Exact,
    /// Empirical covariance from n_samples successor draws per (h, s, a).
    Sampled,
};

/// Largest |cov(phi_i(s'), phi_j(s') | s, a)| over i != j, steps and cells, with
/// sub-state values taken as their integer codes. Returns 0 when d = 1 or H = 1.
double estimate_cross_covariance(const EnvModel& m, std::size_t n_samples, SampleRng& rng,
                                 CovarianceMode mode = CovarianceMode::Exact);

/// Minimum over (h, q) of the U-th largest singular value of the O x U emission
/// matrix, U = |S~|^(d - d_query); zero when O < U. Throws ModelError without emissions.
double min_partial_singular_value(const EnvModel& m);

} // namespace hsilab::envs
