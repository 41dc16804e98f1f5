#include "hsilab/agents/agent.hpp"
#include "hsilab/agents/baselines.hpp"
#include "hsilab/core/errors.hpp"
#include "hsilab/envs/builders.hpp"
#include "hsilab/oracle/oracle.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

using namespace hsilab;
using namespace hsilab::envs;

namespace {

// Open-loop value by forward propagation of the state distribution.
double sequence_value(const EnvModel& m, const std::vector<std::size_t>& actions) {
    std::vector<double> mass = m.initial;
    double total = 0.0;
    for (std::size_t h = 1; h <= m.dims.horizon; ++h) {
        const std::size_t a = actions[h - 1];
        std::vector<double> next(m.state_count(), 0.0);
        for (std::size_t s = 0; s < m.state_count(); ++s) {
            total += mass[s] * m.reward_mean(h, s, a);
            if (h < m.dims.horizon)
                for (std::size_t t = 0; t < m.state_count(); ++t) next[t] += mass[s] * testing::transition_prob(m, h, s, a, t);
        }
        mass = std::move(next);
    }
    return total;
}

// Relabels every sub-state value through `perm`; emissions follow the relabeled unqueried values.
EnvModel permute_alphabet(const EnvModel& m, const std::vector<SubValue>& perm) {
    const Dims& dims = m.dims;
    const std::size_t S = m.state_count();
    std::vector<std::size_t> fwd(S), inv(S);
    for (std::size_t s = 0; s < S; ++s) {
        auto v = decode_state({s}, dims);
        for (auto& x : v.values) x = perm[x];
        fwd[s] = encode_state(v, dims).value;
        inv[fwd[s]] = s;
    }
    auto out = make_blank_model("permuted", dims, m.tag);
    for (std::size_t s = 0; s < S; ++s) out.initial[fwd[s]] = m.initial[s];
    out.transitions = TransitionTable::from_function(
        dims.horizon - 1, S, dims.actions,
        [&](std::size_t h, std::size_t s, std::size_t a, std::vector<Transition>& row) {
            for (const auto& t : m.next(h, inv[s], a)) row.push_back({fwd[t.next], t.prob});
        });
    for (std::size_t h = 1; h <= dims.horizon; ++h)
        for (std::size_t s = 0; s < S; ++s)
            for (std::size_t a = 0; a < dims.actions; ++a) out.reward_mean_ref(h, fwd[s], a) = m.reward_mean(h, s, a);
    if (m.has_emissions()) {
        out.allocate_emissions(m.observations);
        const auto queries = enumerate_query_sets(dims);
        for (std::size_t h = 1; h <= dims.horizon; ++h)
            for (std::size_t q = 0; q < queries.size(); ++q)
                for (std::size_t s = 0; s < S; ++s)
                    for (std::size_t o = 0; o < m.observations; ++o)
                        out.emission_ref(h, q, o, unqueried_value_index(fwd[s], queries[q], dims)) =
                            m.emission(h, q, o, unqueried_value_index(s, queries[q], dims));
    }
    validate_model(out);
    return out;
}

EpisodeTrace sample_trace(const EnvModel& m, std::uint64_t seed) {
    agents::UniformRandomAgent agent(m.dims, seed);
    envs::EnvStreams streams(seed);
    return agents::run_episode(agent, m, 1, streams);
}

} // namespace

TEST_CASE("belief_update examples") {
    const auto tree = build_hard_instance_tree({});
    const auto b0 = oracle::initial_belief(tree);
    const auto u = oracle::belief_update(tree, b0, 1, QuerySet::make({0}, tree.dims), {{0, 0}}, std::nullopt);
    CHECK(u.belief.step == 2);
    CHECK(u.belief.probs[1] == 1.0);
    CHECK(u.evidence == 1.0);

    // uniform over two states that differ only in sub-state 0
    auto m = make_blank_model("two", Dims::make(2, 2, 1, 2, 1), ClassTag::Generic);
    m.initial[0] = m.initial[1] = 0.5;
    m.transitions = TransitionTable::from_function(1, 4, 1, [](std::size_t, std::size_t s, std::size_t, std::vector<Transition>& out) {
        out.push_back({s, 1.0});
    });
    const auto c = oracle::condition_belief(m, oracle::initial_belief(m), QuerySet::make({0}, m.dims), {{0, 1}}, std::nullopt);
    CHECK(c.belief.probs[1] == 1.0);
    CHECK(c.evidence == doctest::Approx(0.5));
    CHECK_THROWS_AS(oracle::condition_belief(m, oracle::initial_belief(m), QuerySet::make({1}, m.dims), {{1, 1}}, std::nullopt),
                    InfeasibleEvidenceError);

    // flat emissions carry no information
    const auto flat = build_hard_instance_flat_emission(0.1);
    oracle::Belief b{2, {0.5, 0.0, 0.0, 0.5}};
    const auto f = oracle::condition_belief(flat, b, QuerySet::make({0}, flat.dims), {{0, 0}}, 1);
    CHECK(f.belief.probs[0] == doctest::Approx(1.0));
    oracle::Belief both{2, {0.5, 0.5, 0.0, 0.0}};
    const auto g = oracle::condition_belief(flat, both, QuerySet::make({1}, flat.dims), {{1, 0}}, 0);
    CHECK(g.belief.probs[0] == doctest::Approx(0.5));
    CHECK(g.belief.probs[1] == doctest::Approx(0.5));
}

TEST_CASE("optimal value examples") {
    const auto t0 = std::chrono::steady_clock::now();
    CHECK(std::abs(oracle::optimal_value(build_hard_instance_groups(2, 0.1)).value - 0.6) < 1e-9);
    CHECK(std::abs(oracle::optimal_value(build_hard_instance_flat_emission(0.1)).value - 0.6) < 1e-9);
    CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::seconds(2));

    auto zero = build_tiny_class2({});
    std::fill(zero.rewards.begin(), zero.rewards.end(), 0.0);
    CHECK(oracle::optimal_value(zero).value == 0.0);

    const auto r = oracle::optimal_value(build_hard_instance_groups(2, 0.1));
    CHECK(r.first_action == 0);
    CHECK(r.nodes > 0);
    CHECK_THROWS_AS(oracle::optimal_value(build_hard_instance_groups(3, 0.1), 5), SizeError);
}

TEST_CASE("optimal value matches brute-force expectimax on random models") {
    testing::Gen g(21);
    for (int trial = 0; trial < 60; ++trial) {
        const Dims dims = g.dims(2, 3, 3, 2);
        if (dims.state_count() > 9) continue;
        const auto m = g.model(dims, g.coin() ? g.range(1, 2) : 0);
        const double want = testing::brute_optimal_value(m);
        const double got = oracle::optimal_value(m).value;
        REQUIRE(std::abs(got - want) < 1e-9);
        REQUIRE(got <= testing::full_observation_value(m) + 1e-9);
    }
}

TEST_CASE("full hindsight reduces to the delayed-state MDP") {
    testing::Gen g(22);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t d = g.range(1, 2), n = g.range(2, 3);
        const Dims dims = Dims::make(d, n, d, g.range(1, 3), g.range(1, 2));
        const auto m = g.model(dims, 0);
        REQUIRE(std::abs(oracle::optimal_value(m).value - testing::delayed_state_value(m)) < 1e-9);
    }
}

TEST_CASE("optimal value is invariant under alphabet relabeling") {
    testing::Gen g(23);
    for (int trial = 0; trial < 30; ++trial) {
        const Dims dims = g.dims(2, 3, 3, 2);
        const auto m = g.model(dims, g.coin() ? 2 : 0);
        std::vector<SubValue> perm(dims.alphabet);
        std::iota(perm.begin(), perm.end(), SubValue{0});
        std::shuffle(perm.begin(), perm.end(), g.engine());
        const auto p = permute_alphabet(m, perm);
        REQUIRE(std::abs(oracle::optimal_value(m).value - oracle::optimal_value(p).value) < 1e-12);
    }
    const auto groups = build_hard_instance_groups(2, 0.1);
    CHECK(std::abs(oracle::optimal_value(permute_alphabet(groups, {3, 1, 0, 2})).value - 0.6) < 1e-12);
}

TEST_CASE("trace evidence equals the path-sum likelihood") {
    testing::Gen g(24);
    for (int trial = 0; trial < 100; ++trial) {
        const Dims dims = g.dims(2, 2, 3, 2);
        const auto m = g.model(dims, g.coin() ? g.range(1, 3) : 0);
        const auto trace = sample_trace(m, trial);
        const double want = testing::path_sum_likelihood(m, trace);
        REQUIRE(want > 0.0);
        REQUIRE(std::abs(oracle::trace_log_evidence(m, trace) - std::log(want)) < 1e-9);
    }
}

TEST_CASE("regret series") {
    const std::vector<double> perfect(5, 0.6);
    const auto zero = oracle::compute_regret(perfect, 0.6, oracle::RegretMode::Expected);
    for (double c : zero.cumulative) CHECK(c == 0.0);

    const std::vector<double> gap(100, 0.5);
    const auto lin = oracle::compute_regret(gap, 0.75, oracle::RegretMode::Expected);
    for (std::size_t k = 0; k < gap.size(); ++k) CHECK(lin.cumulative[k] == doctest::Approx(0.25 * double(k + 1)).epsilon(1e-12));

    // 7 eps / 8 from the eight equally likely open-loop sequences
    const auto groups = build_hard_instance_groups(2, 0.1);
    double mean = 0.0;
    for (std::size_t code = 0; code < 8; ++code)
        mean += sequence_value(groups, {code & 1, (code >> 1) & 1, (code >> 2) & 1, 0}) / 8.0;
    CHECK(mean == doctest::Approx(0.6 - 0.0875).epsilon(1e-12));
    CHECK(agents::evaluate_uniform_policy(groups) == doctest::Approx(mean).epsilon(1e-12));

    const auto trace = sample_trace(groups, 3);
    std::vector<EpisodeTrace> traces{trace};
    const auto realized = oracle::compute_regret(groups, traces, 0.6);
    CHECK(realized.mode == oracle::RegretMode::Realized);
    CHECK(realized.cumulative[0] == doctest::Approx(0.6 - trace.total));

    auto bad = trace;
    bad.steps.pop_back();
    std::vector<EpisodeTrace> broken{bad};
    CHECK_THROWS_AS(oracle::compute_regret(groups, broken, 0.6), ConsistencyError);
    CHECK(oracle::to_string(oracle::RegretMode::Expected) != oracle::to_string(oracle::RegretMode::Realized));
}
