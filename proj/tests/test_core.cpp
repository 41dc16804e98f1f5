#include "hsilab/core/errors.hpp"
#include "hsilab/core/numfmt.hpp"
#include "hsilab/core/rng.hpp"
#include "hsilab/core/types.hpp"
#include "support/generators.hpp"

#include <doctest.h>

#include <clocale>
#include <cmath>
#include <set>

using namespace hsilab;

namespace {

// Reference encoding computed with explicit powers.
std::size_t reference_index(const std::vector<SubValue>& v, std::size_t alphabet) {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
        idx += v[i] * static_cast<std::size_t>(std::llround(std::pow(double(alphabet), double(i))));
    return idx;
}

} // namespace

TEST_CASE("encode_state examples") {
    CHECK(encode_state({{0, 0, 0}}, Dims::make(3, 2, 1, 1, 1)).value == 0);
    CHECK(encode_state({{1, 0, 1}}, Dims::make(3, 2, 1, 1, 1)).value == 5);
    CHECK(encode_state({{2, 1}}, Dims::make(2, 3, 1, 1, 1)).value == 5);
}

TEST_CASE("encode_state rejects invalid vectors") {
    const Dims dims = Dims::make(3, 2, 1, 1, 1);
    CHECK_THROWS_AS(encode_state({{0, 2, 0}}, dims), InvalidStateError);
    CHECK_THROWS_AS(encode_state({{0, 1}}, dims), InvalidStateError);
}

TEST_CASE("decode_state examples") {
    CHECK(decode_state({0}, Dims::make(4, 3, 1, 1, 1)).values == std::vector<SubValue>{0, 0, 0, 0});
    CHECK(decode_state({5}, Dims::make(3, 2, 1, 1, 1)).values == std::vector<SubValue>{1, 0, 1});
    CHECK(decode_state({5}, Dims::make(2, 3, 1, 1, 1)).values == std::vector<SubValue>{2, 1});
    CHECK_THROWS_AS(decode_state({8}, Dims::make(3, 2, 1, 1, 1)), RangeError);
}

TEST_CASE("encode and decode are inverse, exhaustively on small spaces") {
    for (std::size_t d = 1; d <= 4; ++d)
        for (std::size_t n = 1; n <= 4; ++n) {
            const Dims dims = Dims::make(d, n, 1, 1, 1);
            for (std::size_t s = 0; s < dims.state_count(); ++s) {
                const auto v = decode_state({s}, dims);
                REQUIRE(encode_state(v, dims).value == s);
                REQUIRE(reference_index(v.values, n) == s);
                for (std::size_t i = 0; i < d; ++i) REQUIRE(substate_value(s, i, dims) == v.values[i]);
            }
        }
}

TEST_CASE("encode and decode are inverse on random large spaces") {
    testing::Gen g(11);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t d = g.range(5, 16), n = g.range(2, 7);
        const Dims dims = Dims::make(d, n, 1, 1, 1);
        StateVector v;
        for (std::size_t i = 0; i < d; ++i) v.values.push_back(static_cast<SubValue>(g.range(0, n - 1)));
        const auto idx = encode_state(v, dims);
        REQUIRE(decode_state(idx, dims) == v);
        REQUIRE(idx.value == reference_index(v.values, n));
    }
}

TEST_CASE("Dims rejects overflowing and inconsistent shapes") {
    CHECK_THROWS_AS(Dims::make(64, 2, 1, 1, 1), ParameterError);
    CHECK_THROWS_AS(Dims::make(3, 2, 4, 1, 1), ParameterError);
    CHECK_THROWS_AS(Dims::make(3, 2, 0, 1, 1), ParameterError);
    CHECK_THROWS_AS(Dims::make(3, 0, 1, 1, 1), ParameterError);
    CHECK_THROWS_AS(Dims::make(3, 2, 1, 0, 1), ParameterError);
    CHECK_THROWS_AS(Dims::make(3, 2, 1, 1, 0), ParameterError);
    CHECK(Dims::make(3, 2, 2, 4, 2).unqueried_count() == 2);
    CHECK(Dims::make(3, 2, 2, 4, 2).query_value_count() == 4);
}

TEST_CASE("extract_hsi examples") {
    const Dims dims = Dims::make(3, 3, 2, 1, 1);
    CHECK(extract_hsi({{1, 0, 1}}, QuerySet::make({0, 2}, dims)) ==
          std::vector<HsiEntry>{{0, 1}, {2, 1}});
    CHECK(extract_hsi({{1, 0, 1}}, QuerySet::make_any({1}, 3)) == std::vector<HsiEntry>{{1, 0}});
    CHECK(extract_hsi({{2, 1, 0}}, QuerySet::make_any({0, 1, 2}, 3)) ==
          std::vector<HsiEntry>{{0, 2}, {1, 1}, {2, 0}});
}

TEST_CASE("extract_hsi ignores unqueried entries") {
    testing::Gen g(12);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t d = g.range(1, 6), n = g.range(2, 5), k = g.range(1, d);
        const Dims dims = Dims::make(d, n, k, 1, 1);
        const auto queries = enumerate_query_sets(dims);
        const QuerySet& q = queries[g.range(0, queries.size() - 1)];
        StateVector s, t;
        for (std::size_t i = 0; i < d; ++i) {
            s.values.push_back(static_cast<SubValue>(g.range(0, n - 1)));
            t.values.push_back(q.contains(i) ? s.values[i] : static_cast<SubValue>(g.range(0, n - 1)));
        }
        REQUIRE(extract_hsi(s, q) == extract_hsi(t, q));
        const auto si = encode_state(s, dims).value;
        REQUIRE(query_value_index(si, q, dims) == query_value_index(extract_hsi(s, q), n));
        REQUIRE(query_value_index(si, q, dims) == query_value_index(encode_state(t, dims).value, q, dims));
    }
}

TEST_CASE("queried and unqueried indices split the state") {
    const Dims dims = Dims::make(4, 3, 2, 1, 1);
    for (const auto& q : enumerate_query_sets(dims)) {
        std::set<std::pair<std::size_t, std::size_t>> seen;
        for (std::size_t s = 0; s < dims.state_count(); ++s) {
            const auto v = query_value_index(s, q, dims), u = unqueried_value_index(s, q, dims);
            REQUIRE(v < dims.query_value_count());
            REQUIRE(u < dims.unqueried_count());
            REQUIRE(seen.insert({v, u}).second);
        }
    }
}

TEST_CASE("query sets are canonical and enumerated lexicographically") {
    const Dims dims = Dims::make(5, 2, 3, 1, 1);
    CHECK(QuerySet::make({4, 0, 2}, dims).indices() == std::vector<std::size_t>{0, 2, 4});
    CHECK_THROWS_AS(QuerySet::make({0, 0, 1}, dims), ParameterError);
    CHECK_THROWS_AS(QuerySet::make({0, 1}, dims), ParameterError);
    CHECK_THROWS_AS(QuerySet::make({0, 1, 5}, dims), RangeError);

    const auto qs = enumerate_query_sets(dims);
    REQUIRE(qs.size() == 10);
    for (std::size_t k = 0; k < qs.size(); ++k) {
        CHECK(query_set_id(qs[k], dims) == k);
        if (k > 0) CHECK(qs[k - 1] < qs[k]);
    }
    CHECK(qs.front().indices() == std::vector<std::size_t>{0, 1, 2});
    CHECK(qs.back().indices() == std::vector<std::size_t>{2, 3, 4});
}

TEST_CASE("state and query text forms") {
    CHECK(format_state({{1, 0, 1}}, 2) == "101");
    CHECK(format_state({{11, 0, 3}}, 12) == "11-0-3");
    CHECK(format_query(QuerySet::make_any({0, 2}, 3)) == "{0,2}");
}

TEST_CASE("checked_pow detects overflow") {
    CHECK(checked_pow(3, 4) == 81);
    CHECK(checked_pow(7, 0) == 1);
    CHECK_THROWS_AS(checked_pow(2, 64), SizeError);
}

TEST_CASE("rng streams are reproducible and distinct") {
    SampleRng a(42, Stream::Transition), b(42, Stream::Transition), c(42, Stream::Reward), d(43, Stream::Transition);
    bool differs_stream = false, differs_seed = false;
    for (int i = 0; i < 100; ++i) {
        const double x = a.uniform();
        REQUIRE(x == b.uniform());
        REQUIRE(x >= 0.0);
        REQUIRE(x < 1.0);
        differs_stream = differs_stream || x != c.uniform();
        differs_seed = differs_seed || x != d.uniform();
    }
    CHECK(differs_stream);
    CHECK(differs_seed);
}

TEST_CASE("rng categorical and uniform_index frequencies") {
    SampleRng r(7, Stream::Agent);
    const std::vector<double> w{1.0, 3.0, 0.0, 4.0};
    std::vector<int> counts(4, 0), idx(5, 0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        ++counts[r.categorical(w)];
        ++idx[r.uniform_index(5)];
    }
    CHECK(counts[2] == 0);
    CHECK(std::abs(counts[0] / double(n) - 0.125) < 0.005);
    CHECK(std::abs(counts[1] / double(n) - 0.375) < 0.005);
    CHECK(std::abs(counts[3] / double(n) - 0.5) < 0.005);
    for (int c : idx) CHECK(std::abs(c / double(n) - 0.2) < 0.005);
}

TEST_CASE("seed mixing is order sensitive") {
    CHECK(mix_seed(mix_seed(1, 2), 3) != mix_seed(mix_seed(1, 3), 2));
    CHECK(hash_string("optll") != hash_string("opmll"));
    CHECK(hash_string("optll") == hash_string("optll"));
}

TEST_CASE("number formatting is locale independent and round-trips") {
    std::setlocale(LC_NUMERIC, "de_DE.UTF-8");
    CHECK(format_number(0.5, 9) == "0.5");
    CHECK(format_number(1.0 / 3.0, 9) == "0.333333333");
    CHECK(parse_number("2.5") == 2.5);
    std::setlocale(LC_NUMERIC, "C");

    testing::Gen g(13);
    for (int i = 0; i < 1000; ++i) {
        const double x = (g.unit() - 0.5) * std::pow(10.0, double(g.range(0, 12)) - 6.0);
        REQUIRE(parse_number(format_exact(x)) == x);
    }
    CHECK_THROWS_AS(parse_number("1.5x"), ParameterError);
    CHECK_THROWS_AS(parse_number(""), ParameterError);
    CHECK_THROWS_AS(parse_count("-3"), ParameterError);
    CHECK(parse_count("17") == 17);
    CHECK(trim("  a b \t") == "a b");
}
