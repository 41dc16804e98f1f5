#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hsilab {

/// Value of a single sub-state, an integer code in [0, alphabet).
using SubValue = std::uint32_t;

/// Problem dimensions shared by models, agents and the oracle.
///
/// `d` sub-states over an alphabet of `alphabet` values, of which the agent may
/// query `d_query` per step; episodes last `horizon` steps with `actions` actions.
struct Dims {
    std::size_t d = 1;
    std::size_t alphabet = 1;
    std::size_t d_query = 1;
    std::size_t horizon = 1;
    std::size_t actions = 1;

    /// Validates and returns the dims. Throws ParameterError on violation,
    /// including when alphabet^d does not fit a 64-bit index.
    static Dims make(std::size_t d, std::size_t alphabet, std::size_t d_query,
                     std::size_t horizon, std::size_t actions);

    /// Total number of full states, alphabet^d.
    std::size_t state_count() const;
    /// Number of value combinations of the d - d_query unqueried sub-states.
    std::size_t unqueried_count() const;
    /// Number of value combinations of a query set, alphabet^d_query.
    std::size_t query_value_count() const;

    void validate() const;

    friend bool operator==(const Dims&, const Dims&) = default;
};

/// Dense index of a full state under the little-endian mixed-radix encoding.
struct StateIndex {
    std::size_t value = 0;

    friend bool operator==(StateIndex, StateIndex) = default;
    friend auto operator<=>(StateIndex, StateIndex) = default;
};

/// A full state as its d sub-state values.
struct StateVector {
    std::vector<SubValue> values;

    friend bool operator==(const StateVector&, const StateVector&) = default;
};

/// A canonical (sorted, distinct) set of queried sub-state indices.
class QuerySet {
public:
    QuerySet() = default;

    /// Canonicalizes `indices` and checks it against `dims` (length d_query, range [0,d)).
    static QuerySet make(std::vector<std::size_t> indices, const Dims& dims);
    /// Like make() but without the d_query length check.
    static QuerySet make_any(std::vector<std::size_t> indices, std::size_t d);

    const std::vector<std::size_t>& indices() const noexcept { return indices_; }
    std::size_t size() const noexcept { return indices_.size(); }
    bool contains(std::size_t i) const;
    std::size_t operator[](std::size_t k) const { return indices_[k]; }

    friend bool operator==(const QuerySet&, const QuerySet&) = default;
    friend auto operator<=>(const QuerySet&, const QuerySet&) = default;

private:
    std::vector<std::size_t> indices_;
};

/// One queried (sub-state index, value) pair.
struct HsiEntry {
    std::size_t index = 0;
    SubValue value = 0;

    friend bool operator==(const HsiEntry&, const HsiEntry&) = default;
};

/// Everything the agent receives after acting at one step.
struct Feedback {
    std::vector<HsiEntry> hsi;
    std::optional<std::size_t> observation;
    double reward = 0.0;
};

StateIndex encode_state(const StateVector& v, const Dims& dims);
StateVector decode_state(StateIndex idx, const Dims& dims);

/// Sub-state value i of the state with index idx, without materializing the vector.
SubValue substate_value(std::size_t idx, std::size_t i, const Dims& dims);

std::vector<HsiEntry> extract_hsi(const StateVector& s, const QuerySet& q);

/// Mixed-radix index of the values of `s` at the positions of `q` (first index least significant).
std::size_t query_value_index(std::size_t state, const QuerySet& q, const Dims& dims);
/// Same, from explicit HSI entries.
std::size_t query_value_index(const std::vector<HsiEntry>& hsi, std::size_t alphabet);
/// Mixed-radix index of the values of `s` at the positions NOT in `q`.
std::size_t unqueried_value_index(std::size_t state, const QuerySet& q, const Dims& dims);

/// All query sets of size d_query in lexicographic order. Position in the list is the query id.
std::vector<QuerySet> enumerate_query_sets(const Dims& dims);
/// Position of q in enumerate_query_sets(dims).
std::size_t query_set_id(const QuerySet& q, const Dims& dims);

/// Digit string for alphabets up to 10 (e.g. "101"), dash-separated decimals otherwise.
std::string format_state(const StateVector& v, std::size_t alphabet);
std::string format_query(const QuerySet& q);

/// Checked integer power; throws SizeError on 64-bit overflow.
std::size_t checked_pow(std::size_t base, std::size_t exp);

} // namespace hsilab
