#pragma once

#include "hsilab/core/types.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hsilab::envs {

/// Structural class of a model. Class1 has product-form transitions,
/// Class2 adds partial emissions of the unqueried sub-states.
enum class ClassTag { Class1, Class2, Generic };

std::string to_string(ClassTag tag);
ClassTag parse_class_tag(std::string_view s);

struct Transition {
    std::size_t next = 0;
    double prob = 0.0;
};

/// Sparse kernel P_h(s' | s, a) for steps h = 1..H-1, stored row-compressed.
class TransitionTable {
public:
    using RowFn = std::function<void(std::size_t step, std::size_t s, std::size_t a,
                                     std::vector<Transition>& out)>;

    TransitionTable() = default;

    /// Builds every row (steps x states x actions) by calling `fn`, which appends
    /// the non-zero entries of the row to `out`.
    static TransitionTable from_function(std::size_t steps, std::size_t states,
                                         std::size_t actions, const RowFn& fn);

    std::span<const Transition> row(std::size_t step, std::size_t s, std::size_t a) const;

    std::size_t steps() const noexcept { return steps_; }
    std::size_t states() const noexcept { return states_; }
    std::size_t actions() const noexcept { return actions_; }
    std::size_t entry_count() const noexcept { return entries_.size(); }

private:
    std::size_t steps_ = 0;
    std::size_t states_ = 0;
    std::size_t actions_ = 0;
    std::vector<std::size_t> offsets_;
    std::vector<Transition> entries_;
};

/// Independent per-sub-state kernels P_{h,i}(v' | v, a).
class ProductKernel {
public:
    ProductKernel() = default;
    ProductKernel(std::size_t steps, std::size_t d, std::size_t alphabet, std::size_t actions);

    double& at(std::size_t step, std::size_t i, SubValue v, std::size_t a, SubValue next);
    double at(std::size_t step, std::size_t i, SubValue v, std::size_t a, SubValue next) const;
    /// The row P_{h,i}(. | v, a) as a span of `alphabet` probabilities.
    std::span<const double> row(std::size_t step, std::size_t i, SubValue v, std::size_t a) const;

    std::size_t steps() const noexcept { return steps_; }
    std::size_t d() const noexcept { return d_; }
    std::size_t alphabet() const noexcept { return alphabet_; }
    std::size_t actions() const noexcept { return actions_; }

    /// Joint kernel obtained by multiplying the sub-state kernels.
    TransitionTable expand(const Dims& dims) const;

    friend bool operator==(const ProductKernel&, const ProductKernel&) = default;

private:
    std::size_t offset(std::size_t step, std::size_t i, SubValue v, std::size_t a) const;

    std::size_t steps_ = 0;
    std::size_t d_ = 0;
    std::size_t alphabet_ = 0;
    std::size_t actions_ = 0;
    std::vector<double> probs_;
};

/// Tabular episodic POMDP with vector states.
///
/// Steps are 1-based throughout: transitions exist for h in [1, H-1],
/// rewards and emissions for h in [1, H]. Emission tables are stored per
/// (step, query id) as O x U column-stochastic matrices, where U indexes the
/// unqueried value combinations and the query id is the position of the query
/// set in enumerate_query_sets(dims).
struct EnvModel {
    std::string name;
    Dims dims;
    ClassTag tag = ClassTag::Generic;
    std::size_t observations = 0;
    std::vector<double> initial;
    TransitionTable transitions;
    std::optional<ProductKernel> product;
    std::vector<double> emissions;
    std::vector<double> rewards;

    std::size_t state_count() const { return dims.state_count(); }
    bool has_emissions() const noexcept { return !emissions.empty(); }
    std::size_t query_count() const;

    std::span<const Transition> next(std::size_t step, std::size_t s, std::size_t a) const {
        return transitions.row(step, s, a);
    }
    double reward_mean(std::size_t step, std::size_t s, std::size_t a) const {
        return rewards[((step - 1) * initial.size() + s) * dims.actions + a];
    }
    double& reward_mean_ref(std::size_t step, std::size_t s, std::size_t a) {
        return rewards[((step - 1) * initial.size() + s) * dims.actions + a];
    }
    double emission(std::size_t step, std::size_t query_id, std::size_t o, std::size_t u) const;
    double& emission_ref(std::size_t step, std::size_t query_id, std::size_t o, std::size_t u);

    /// Allocates zeroed emission tables for every (step, query set).
    void allocate_emissions(std::size_t n_observations);
};

/// Upper bound on states for which dense per-state tables are allocated.
inline constexpr std::size_t kMaxDenseStates = std::size_t{1} << 22;

/// Tolerance used for every normalization check.
inline constexpr double kNormTolerance = 1e-12;

/// Checks every EnvModel invariant; throws ModelError naming the first violation.
void validate_model(const EnvModel& m);

/// Allocates an EnvModel with zeroed tables; throws SizeError when the state
/// space is too large for dense storage.
EnvModel make_blank_model(std::string name, const Dims& dims, ClassTag tag);

} // namespace hsilab::envs
