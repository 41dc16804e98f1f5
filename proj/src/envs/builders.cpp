#include "hsilab/envs/builders.hpp"

#include "hsilab/core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hsilab::envs {

double max_hard_epsilon() { return std::sqrt(1.0 / 8.0); }

namespace {

void check_epsilon(double epsilon) {
    if (!(epsilon > 0.0 && epsilon <= max_hard_epsilon()))
        throw ParameterError("epsilon must lie in (0, sqrt(1/8)], got " + std::to_string(epsilon));
}

std::vector<SubValue> iota_values(std::size_t d) {
    std::vector<SubValue> v(d);
    for (std::size_t i = 0; i < d; ++i) v[i] = static_cast<SubValue>(i);
    return v;
}

// Row-stochastic sample from the uniform simplex.
void simplex_row(SampleRng& rng, std::span<double> out) {
    double total = 0.0;
    for (double& x : out) {
        x = -std::log1p(-rng.uniform());
        total += x;
    }
    for (double& x : out) x /= total;
}

void uniform_over(const std::vector<std::size_t>& targets, std::vector<Transition>& out) {
    const double p = 1.0 / static_cast<double>(targets.size());
    for (std::size_t t : targets) out.push_back({t, p});
}

} // namespace

std::vector<StateVector> group_representations(std::size_t d, std::size_t d_query) {
    if (d < 2) throw ParameterError("the two-group construction needs d >= 2");
    if (d_query == 2 && d == 3) {
        // x_k is stored as value k - 1
        const std::vector<std::vector<SubValue>> table = {
            {0, 1, 2}, {0, 5, 3}, {4, 1, 3}, {4, 5, 2},
            {0, 1, 3}, {4, 1, 2}, {0, 5, 2}, {4, 5, 3},
        };
        std::vector<StateVector> out;
        for (const auto& v : table) out.push_back({v});
        return out;
    }
    if (d_query != 1)
        throw ParameterError("two-group construction is unsupported for d=" + std::to_string(d) +
                             ", d_query=" + std::to_string(d_query));

    std::vector<StateVector> out;
    out.push_back({iota_values(d)});
    for (std::size_t delta = 2; delta <= d; ++delta) {
        auto v = iota_values(d);
        v[delta - 2] = static_cast<SubValue>(d + delta - 2);
        v[delta - 1] = static_cast<SubValue>(d + delta - 1);
        out.push_back({v});
    }
    if (d == 2) {
        // keeps the labels of the two-sub-state illustration: [x1,x4], [x3,x2]
        out.push_back({{0, 3}});
        out.push_back({{2, 1}});
        return out;
    }
    for (std::size_t delta = 1; delta <= d; ++delta) {
        auto v = iota_values(d);
        v[delta - 1] = static_cast<SubValue>(d + delta - 1);
        out.push_back({v});
    }
    return out;
}

EnvModel build_hard_instance_groups(std::size_t d, double epsilon, const GroupsOptions& opts) {
    check_epsilon(epsilon);
    if (opts.actions < 2) throw ParameterError("the two-group construction needs at least 2 actions");
    const auto reps = group_representations(d, opts.d_query);
    const std::size_t alphabet = opts.d_query == 1 ? 2 * d : 6;
    const Dims dims = Dims::make(d, alphabet, opts.d_query, 4, opts.actions);

    EnvModel m = make_blank_model("groups", dims, ClassTag::Generic);
    const std::size_t S = dims.state_count();
    const std::size_t half = reps.size() / 2;

    std::vector<std::size_t> ga, gb;
    std::vector<int> group(S, -1);
    for (std::size_t k = 0; k < reps.size(); ++k) {
        const std::size_t idx = encode_state(reps[k], dims).value;
        (k < half ? ga : gb).push_back(idx);
        group[idx] = k < half ? 0 : 1;
    }
    m.initial[ga.front()] = 1.0;

    m.transitions = TransitionTable::from_function(
        3, S, dims.actions,
        [&](std::size_t h, std::size_t s, std::size_t a, std::vector<Transition>& out) {
            if (group[s] < 0) {
                out.push_back({s, 1.0});
                return;
            }
            const bool first = a == 0;
            const bool in_a = group[s] == 0;
            switch (h) {
            case 1: uniform_over(first ? ga : gb, out); break;
            case 2: uniform_over(first ? gb : (in_a ? ga : gb), out); break;
            default: uniform_over(first ? (in_a ? ga : gb) : gb, out); break;
            }
        });

    for (std::size_t a = 0; a < dims.actions; ++a) {
        for (std::size_t s : ga) m.reward_mean_ref(4, s, a) = 0.5 + epsilon;
        for (std::size_t s : gb) m.reward_mean_ref(4, s, a) = 0.5;
    }
    validate_model(m);
    return m;
}

EnvModel build_hard_instance_flat_emission(double epsilon, std::vector<double> flat_column) {
    check_epsilon(epsilon);
    const Dims dims = Dims::make(2, 2, 1, 4, 2);
    EnvModel m = make_blank_model("flat-emission", dims, ClassTag::Class2);
    m.initial[0] = 1.0;

    ProductKernel pk(3, 2, 2, 2);
    for (std::size_t i = 0; i < 2; ++i)
        for (SubValue v = 0; v < 2; ++v) {
            // step 1: a(1) -> x1, a(2) -> x2
            pk.at(1, i, v, 0, 0) = 1.0;
            pk.at(1, i, v, 1, 1) = 1.0;
            // step 2: a(1) -> x2, a(2) keeps the value
            pk.at(2, i, v, 0, 1) = 1.0;
            pk.at(2, i, v, 1, v) = 1.0;
            // step 3: a(1) keeps the value, a(2) -> x2
            pk.at(3, i, v, 0, v) = 1.0;
            pk.at(3, i, v, 1, 1) = 1.0;
        }
    m.transitions = pk.expand(dims);
    m.product = std::move(pk);

    for (std::size_t s = 0; s < 4; ++s)
        for (std::size_t a = 0; a < 2; ++a) m.reward_mean_ref(4, s, a) = s == 0 ? 0.5 + epsilon : 0.5;

    const std::size_t O = flat_column.size();
    if (O == 0) throw ParameterError("flat emission column must be non-empty");
    std::vector<double> matrix(O * 2);
    for (std::size_t o = 0; o < O; ++o) matrix[o * 2] = matrix[o * 2 + 1] = flat_column[o];
    set_uniform_emissions(m, O, matrix);
    return m;
}

std::size_t tree_depth(std::size_t states, std::size_t actions) {
    if (actions < 2) throw ParameterError("tree depth needs at least 2 actions");
    std::size_t depth = 0;
    std::size_t reach = 1;
    while (reach < states) {
        reach = reach > states / actions ? states : reach * actions;
        ++depth;
    }
    return depth;
}

std::size_t tree_stay_action(std::size_t m, std::size_t actions) {
    return std::max<std::size_t>(m % actions, 1) - 1;
}

EnvModel build_hard_instance_tree(const TreeParams& p) {
    check_epsilon(p.epsilon);
    const std::size_t S = checked_pow(p.alphabet, p.d);
    if (p.actions < 2 || p.actions > S)
        throw ParameterError("tree instance needs 2 <= A <= S");
    const std::size_t depth = tree_depth(S, p.actions);
    const std::size_t h0 = p.h0 == 0 ? depth + 1 : p.h0;
    if (h0 <= depth) throw ParameterError("rewarded step must exceed the tree depth");
    const std::size_t H = p.horizon == 0 ? h0 : p.horizon;
    if (H < h0) throw ParameterError("horizon must be at least the rewarded step");
    if (p.m_star < 1 || p.m_star > S) throw ParameterError("m_star must lie in [1, S]");

    const Dims dims = Dims::make(p.d, p.alphabet, p.d_query, H, p.actions);
    EnvModel m = make_blank_model("tree", dims, ClassTag::Generic);
    m.initial[0] = 1.0;
    const std::size_t A = p.actions;

    m.transitions = TransitionTable::from_function(
        H - 1, S, A,
        [&](std::size_t h, std::size_t s, std::size_t a, std::vector<Transition>& out) {
            const std::size_t label = s + 1;
            if (h <= depth) {
                const std::size_t child = A * (label - 1) + a + 1;
                out.push_back({child <= S ? child - 1 : 0, 1.0});
            } else {
                out.push_back({a == tree_stay_action(label, A) ? s : 0, 1.0});
            }
        });

    for (std::size_t s = 0; s < S; ++s) {
        const std::size_t label = s + 1;
        m.reward_mean_ref(h0, s, tree_stay_action(label, A)) =
            label == p.m_star ? 0.5 + p.epsilon : 0.5;
    }
    validate_model(m);
    return m;
}

EnvModel random_independent_model(const Dims& dims, SampleRng& rng) {
    EnvModel m = make_blank_model("random-independent", dims, ClassTag::Class1);
    const std::size_t S = dims.state_count();
    const std::size_t n = dims.alphabet;

    std::vector<double> marginals(dims.d * n);
    for (std::size_t i = 0; i < dims.d; ++i) simplex_row(rng, {marginals.data() + i * n, n});
    for (std::size_t s = 0; s < S; ++s) {
        double p = 1.0;
        for (std::size_t i = 0; i < dims.d; ++i) p *= marginals[i * n + substate_value(s, i, dims)];
        m.initial[s] = p;
    }

    ProductKernel pk(dims.horizon - 1, dims.d, n, dims.actions);
    std::vector<double> row(n);
    for (std::size_t h = 1; h < dims.horizon; ++h)
        for (std::size_t i = 0; i < dims.d; ++i)
            for (SubValue v = 0; v < n; ++v)
                for (std::size_t a = 0; a < dims.actions; ++a) {
                    simplex_row(rng, row);
                    for (SubValue w = 0; w < n; ++w) pk.at(h, i, v, a, w) = row[w];
                }
    m.transitions = pk.expand(dims);
    m.product = std::move(pk);

    for (double& r : m.rewards) r = rng.uniform();
    validate_model(m);
    return m;
}

EnvModel random_class2_model(const Dims& dims, std::size_t observations, SampleRng& rng) {
    EnvModel m = random_independent_model(dims, rng);
    m.name = "random-class2";
    m.tag = ClassTag::Class2;
    m.allocate_emissions(observations);
    const std::size_t U = dims.unqueried_count();
    std::vector<double> col(observations);
    for (std::size_t h = 1; h <= dims.horizon; ++h)
        for (std::size_t q = 0; q < m.query_count(); ++q)
            for (std::size_t u = 0; u < U; ++u) {
                simplex_row(rng, col);
                for (std::size_t o = 0; o < observations; ++o) m.emission_ref(h, q, o, u) = col[o];
            }
    validate_model(m);
    return m;
}

EnvModel build_correlated_pair() {
    const Dims dims = Dims::make(2, 2, 1, 2, 1);
    EnvModel m = make_blank_model("correlated-pair", dims, ClassTag::Generic);
    m.initial[0] = 1.0;
    m.transitions = TransitionTable::from_function(
        1, 4, 1, [](std::size_t, std::size_t, std::size_t, std::vector<Transition>& out) {
            out.push_back({0, 0.5});
            out.push_back({3, 0.5});
        });
    validate_model(m);
    return m;
}

void set_uniform_emissions(EnvModel& m, std::size_t observations, std::span<const double> matrix) {
    const std::size_t U = m.dims.unqueried_count();
    if (matrix.size() != observations * U)
        throw ParameterError("emission matrix must be O x U = " + std::to_string(observations) +
                             " x " + std::to_string(U));
    m.tag = ClassTag::Class2;
    m.allocate_emissions(observations);
    for (std::size_t h = 1; h <= m.dims.horizon; ++h)
        for (std::size_t q = 0; q < m.query_count(); ++q)
            for (std::size_t o = 0; o < observations; ++o)
                for (std::size_t u = 0; u < U; ++u) m.emission_ref(h, q, o, u) = matrix[o * U + u];
    validate_model(m);
}

void set_identity_emissions(EnvModel& m) {
    const std::size_t U = m.dims.unqueried_count();
    std::vector<double> eye(U * U, 0.0);
    for (std::size_t u = 0; u < U; ++u) eye[u * U + u] = 1.0;
    set_uniform_emissions(m, U, eye);
}

EnvModel build_tiny_class2(const TinyClass2Params& p) {
    for (double x : {p.stay, p.good_after_action1, p.accuracy})
        if (!(x >= 0.0 && x <= 1.0)) throw ParameterError("tiny class2 parameters must lie in [0,1]");
    const Dims dims = Dims::make(2, 2, 1, 2, 2);
    EnvModel m = make_blank_model("tiny-class2", dims, ClassTag::Class2);
    for (double& x : m.initial) x = 0.25;

    ProductKernel pk(1, 2, 2, 2);
    for (SubValue v = 0; v < 2; ++v) {
        pk.at(1, 0, v, 0, 1) = 0.5;
        pk.at(1, 0, v, 0, 0) = 0.5;
        pk.at(1, 0, v, 1, 1) = p.good_after_action1;
        pk.at(1, 0, v, 1, 0) = 1.0 - p.good_after_action1;
        for (std::size_t a = 0; a < 2; ++a) {
            pk.at(1, 1, v, a, v) = p.stay;
            pk.at(1, 1, v, a, 1 - v) = 1.0 - p.stay;
        }
    }
    m.transitions = pk.expand(dims);
    m.product = std::move(pk);

    for (std::size_t s = 0; s < 4; ++s)
        for (std::size_t a = 0; a < 2; ++a) {
            const SubValue good = substate_value(s, 0, dims);
            const SubValue tracked = substate_value(s, 1, dims);
            m.reward_mean_ref(1, s, a) = a == 0 ? 0.1 : 0.0;
            m.reward_mean_ref(2, s, a) = 0.5 * (a == tracked ? 1.0 : 0.0) + 0.5 * good;
        }

    const std::vector<double> matrix = {p.accuracy, 1.0 - p.accuracy, 1.0 - p.accuracy, p.accuracy};
    set_uniform_emissions(m, 2, matrix);
    return m;
}

std::vector<EnvModel> tiny_class2_grid() {
    std::vector<EnvModel> out;
    for (double stay : {0.3, 0.8})
        for (double good : {0.6, 0.9})
            for (double acc : {0.65, 0.85}) {
                out.push_back(build_tiny_class2({stay, good, acc}));
                out.back().name = "tiny-class2[" + std::to_string(out.size() - 1) + "]";
            }
    return out;
}

} // namespace hsilab::envs
