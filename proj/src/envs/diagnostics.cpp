#include "hsilab/envs/diagnostics.hpp"

#include "hsilab/core/errors.hpp"
#include "hsilab/envs/sampling.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace hsilab::envs {

namespace {

// Max |cov| over sub-state pairs given weighted successor states.
double max_pair_cov(const Dims& dims, const std::vector<std::pair<std::size_t, double>>& mass) {
    const std::size_t d = dims.d;
    std::vector<double> mean(d, 0.0);
    for (const auto& [s, p] : mass)
        for (std::size_t i = 0; i < d; ++i) mean[i] += p * substate_value(s, i, dims);
    double worst = 0.0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) {
            double c = 0.0;
            for (const auto& [s, p] : mass)
                c += p * (substate_value(s, i, dims) - mean[i]) * (substate_value(s, j, dims) - mean[j]);
            worst = std::max(worst, std::fabs(c));
        }
    return worst;
}

} // namespace

double estimate_cross_covariance(const EnvModel& m, std::size_t n_samples, SampleRng& rng,
                                 CovarianceMode mode) {
    if (n_samples == 0) throw ParameterError("n_samples must be positive");
    const Dims& dims = m.dims;
    if (dims.d < 2) return 0.0;
    const std::size_t S = dims.state_count();

    double worst = 0.0;
    std::vector<std::pair<std::size_t, double>> mass;
    for (std::size_t h = 1; h < dims.horizon; ++h)
        for (std::size_t s = 0; s < S; ++s)
            for (std::size_t a = 0; a < dims.actions; ++a) {
                mass.clear();
                if (mode == CovarianceMode::Exact) {
                    for (const auto& e : m.next(h, s, a)) mass.emplace_back(e.next, e.prob);
                } else {
                    const double w = 1.0 / static_cast<double>(n_samples);
                    for (std::size_t k = 0; k < n_samples; ++k)
                        mass.emplace_back(transition(m, h, {s}, a, rng).value, w);
                }
                worst = std::max(worst, max_pair_cov(dims, mass));
            }
    return worst;
}

double min_partial_singular_value(const EnvModel& m) {
    if (!m.has_emissions()) throw ModelError("model '" + m.name + "' has no emission tables");
    const std::size_t U = m.dims.unqueried_count();
    const std::size_t O = m.observations;
    if (O < U) return 0.0;

    double best = std::numeric_limits<double>::infinity();
    Eigen::MatrixXd mat(O, U);
    for (std::size_t h = 1; h <= m.dims.horizon; ++h)
        for (std::size_t q = 0; q < m.query_count(); ++q) {
            for (std::size_t o = 0; o < O; ++o)
                for (std::size_t u = 0; u < U; ++u)
                    mat(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(u)) = m.emission(h, q, o, u);
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(mat);
            const auto& sv = svd.singularValues();
            best = std::min(best, sv(static_cast<Eigen::Index>(U - 1)));
        }
    // singular values of rank-deficient matrices come back at rounding level
    return best < 1e-13 ? 0.0 : best;
}

} // namespace hsilab::envs
