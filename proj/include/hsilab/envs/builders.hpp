#pragma once

#include "hsilab/core/rng.hpp"
#include "hsilab/core/types.hpp"
#include "hsilab/envs/model.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace hsilab::envs {

/// Largest admissible gap epsilon for the hard instances, sqrt(1/8).
double max_hard_epsilon();

struct GroupsOptions {
    std::size_t d_query = 1;
    /// Actions beyond the second reuse the rows of the second action.
    std::size_t actions = 2;
};

/// Representations of the two-group construction: the first half of the
/// returned vector is group a, the second half group b. Supported shapes are
/// d_query = 1 for any d >= 2 and the explicit (d = 3, d_query = 2) case.
std::vector<StateVector> group_representations(std::size_t d, std::size_t d_query);

/// Two-group indistinguishable instance: H = 4, alphabet 2d, start at the first
/// group-a state, terminal Bernoulli reward 1/2 + eps in group a and 1/2 in group b.
EnvModel build_hard_instance_groups(std::size_t d, double epsilon, const GroupsOptions& opts = {});

/// Two sub-states over {x1, x2} with deterministic per-sub-state kernels and
/// identical emission columns. `flat_column` is the shared emission column.
EnvModel build_hard_instance_flat_emission(double epsilon,
                                           std::vector<double> flat_column = {0.5, 0.5});

struct TreeParams {
    std::size_t alphabet = 2;
    std::size_t d = 3;
    std::size_t actions = 2;
    double epsilon = 0.1;
    /// Rewarded step; 0 selects depth + 1.
    std::size_t h0 = 0;
    /// 1-based label of the better rewarded state.
    std::size_t m_star = 1;
    /// Horizon; 0 selects h0.
    std::size_t horizon = 0;
    std::size_t d_query = 1;
};

/// Smallest L with actions^L >= states.
std::size_t tree_depth(std::size_t states, std::size_t actions);

/// 0-based index of the action that keeps state s(m) in place after the fan-out.
std::size_t tree_stay_action(std::size_t m, std::size_t actions);

/// Deterministic fan-out tree followed by stay-or-reset dynamics, with a single
/// rewarded step h0. State s(m) is the state with index m - 1.
EnvModel build_hard_instance_tree(const TreeParams& p);

/// Product-form model with uniform-simplex sub-state rows, a product initial
/// distribution and uniform reward means. Draws do not depend on d_query.
EnvModel random_independent_model(const Dims& dims, SampleRng& rng);

/// random_independent_model plus uniform-simplex emission columns.
EnvModel random_class2_model(const Dims& dims, std::size_t observations, SampleRng& rng);

/// Two binary sub-states that both copy one fair coin at the single transition.
EnvModel build_correlated_pair();

/// Writes the same O x U matrix (row-major, columns summing to 1) at every
/// (step, query set) and tags the model Class2.
void set_uniform_emissions(EnvModel& m, std::size_t observations, std::span<const double> matrix);

/// Identity emissions with O = |S~|^(d - d_query).
void set_identity_emissions(EnvModel& m);

/// Two-step Class-2 family over two binary sub-states. Sub-state 0 becomes 1
/// with probability 0.5 after action 0 and `good_after_action1` after action 1;
/// sub-state 1 keeps its value with probability `stay`; the observation reports
/// the unqueried sub-state correctly with probability `accuracy`.
struct TinyClass2Params {
    double stay = 0.8;
    double good_after_action1 = 0.6;
    double accuracy = 0.85;
};

EnvModel build_tiny_class2(const TinyClass2Params& p);

/// The eight-member grid stay x good x accuracy over {0.3,0.8} x {0.6,0.9} x
/// {0.65,0.85}, stay-major. The default parameters sit at index 5.
std::vector<EnvModel> tiny_class2_grid();
inline constexpr std::size_t kTinyClass2TruthIndex = 5;

} // namespace hsilab::envs
