#include "hsilab/core/types.hpp"

#include "hsilab/core/errors.hpp"

#include <algorithm>
#include <limits>

namespace hsilab {

std::size_t checked_pow(std::size_t base, std::size_t exp) {
    std::size_t result = 1;
    for (std::size_t k = 0; k < exp; ++k) {
        if (base != 0 && result > std::numeric_limits<std::size_t>::max() / base)
            throw SizeError("integer power overflows the index type");
        result *= base;
    }
    return result;
}

Dims Dims::make(std::size_t d, std::size_t alphabet, std::size_t d_query,
                std::size_t horizon, std::size_t actions) {
    Dims dims{d, alphabet, d_query, horizon, actions};
    dims.validate();
    return dims;
}

void Dims::validate() const {
    if (d == 0) throw ParameterError("d must be positive");
    if (alphabet == 0) throw ParameterError("alphabet size must be positive");
    if (d_query == 0 || d_query > d) throw ParameterError("d_query must satisfy 1 <= d_query <= d");
    if (horizon == 0) throw ParameterError("horizon must be positive");
    if (actions == 0) throw ParameterError("action count must be positive");
    try {
        (void)checked_pow(alphabet, d);
    } catch (const SizeError&) {
        throw ParameterError("alphabet^d overflows the state index type");
    }
}

std::size_t Dims::state_count() const { return checked_pow(alphabet, d); }
std::size_t Dims::unqueried_count() const { return checked_pow(alphabet, d - d_query); }
std::size_t Dims::query_value_count() const { return checked_pow(alphabet, d_query); }

QuerySet QuerySet::make_any(std::vector<std::size_t> indices, std::size_t d) {
    std::sort(indices.begin(), indices.end());
    if (std::adjacent_find(indices.begin(), indices.end()) != indices.end())
        throw ParameterError("query set has duplicate indices");
    if (!indices.empty() && indices.back() >= d)
        throw RangeError("query index out of range");
    QuerySet q;
    q.indices_ = std::move(indices);
    return q;
}

QuerySet QuerySet::make(std::vector<std::size_t> indices, const Dims& dims) {
    if (indices.size() != dims.d_query)
        throw ParameterError("query set must have exactly d_query indices");
    return make_any(std::move(indices), dims.d);
}

bool QuerySet::contains(std::size_t i) const {
    return std::binary_search(indices_.begin(), indices_.end(), i);
}

StateIndex encode_state(const StateVector& v, const Dims& dims) {
    if (v.values.size() != dims.d) throw InvalidStateError("state vector length differs from d");
    std::size_t idx = 0;
    std::size_t radix = 1;
    for (SubValue x : v.values) {
        if (x >= dims.alphabet) throw InvalidStateError("sub-state value outside the alphabet");
        idx += static_cast<std::size_t>(x) * radix;
        radix *= dims.alphabet;
    }
    return StateIndex{idx};
}

StateVector decode_state(StateIndex idx, const Dims& dims) {
    if (idx.value >= dims.state_count()) throw RangeError("state index out of range");
    StateVector v;
    v.values.resize(dims.d);
    std::size_t rest = idx.value;
    for (std::size_t i = 0; i < dims.d; ++i) {
        v.values[i] = static_cast<SubValue>(rest % dims.alphabet);
        rest /= dims.alphabet;
    }
    return v;
}

SubValue substate_value(std::size_t idx, std::size_t i, const Dims& dims) {
    for (std::size_t k = 0; k < i; ++k) idx /= dims.alphabet;
    return static_cast<SubValue>(idx % dims.alphabet);
}

std::vector<HsiEntry> extract_hsi(const StateVector& s, const QuerySet& q) {
    std::vector<HsiEntry> out;
    out.reserve(q.size());
    for (std::size_t i : q.indices()) {
        if (i >= s.values.size()) throw RangeError("query index exceeds state length");
        out.push_back({i, s.values[i]});
    }
    return out;
}

std::size_t query_value_index(std::size_t state, const QuerySet& q, const Dims& dims) {
    std::size_t idx = 0;
    std::size_t radix = 1;
    for (std::size_t i : q.indices()) {
        idx += substate_value(state, i, dims) * radix;
        radix *= dims.alphabet;
    }
    return idx;
}

std::size_t query_value_index(const std::vector<HsiEntry>& hsi, std::size_t alphabet) {
    std::size_t idx = 0;
    std::size_t radix = 1;
    for (const auto& e : hsi) {
        idx += e.value * radix;
        radix *= alphabet;
    }
    return idx;
}

std::size_t unqueried_value_index(std::size_t state, const QuerySet& q, const Dims& dims) {
    std::size_t idx = 0;
    std::size_t radix = 1;
    std::size_t rest = state;
    for (std::size_t i = 0; i < dims.d; ++i) {
        const std::size_t v = rest % dims.alphabet;
        rest /= dims.alphabet;
        if (q.contains(i)) continue;
        idx += v * radix;
        radix *= dims.alphabet;
    }
    return idx;
}

std::vector<QuerySet> enumerate_query_sets(const Dims& dims) {
    std::vector<QuerySet> out;
    std::vector<std::size_t> pick(dims.d_query);
    for (std::size_t k = 0; k < dims.d_query; ++k) pick[k] = k;
    while (true) {
        out.push_back(QuerySet::make(pick, dims));
        // advance to the next combination in lexicographic order
        std::size_t k = dims.d_query;
        while (k > 0 && pick[k - 1] == dims.d - dims.d_query + (k - 1)) --k;
        if (k == 0) break;
        ++pick[k - 1];
        for (std::size_t j = k; j < dims.d_query; ++j) pick[j] = pick[j - 1] + 1;
    }
    return out;
}

std::size_t query_set_id(const QuerySet& q, const Dims& dims) {
    const auto all = enumerate_query_sets(dims);
    const auto it = std::find(all.begin(), all.end(), q);
    if (it == all.end()) throw ParameterError("query set is not valid under these dims");
    return static_cast<std::size_t>(it - all.begin());
}

std::string format_state(const StateVector& v, std::size_t alphabet) {
    std::string out;
    for (std::size_t k = 0; k < v.values.size(); ++k) {
        if (alphabet <= 10) {
            out.push_back(static_cast<char>('0' + v.values[k]));
        } else {
            if (k > 0) out.push_back('-');
            out += std::to_string(v.values[k]);
        }
    }
    return out;
}

std::string format_query(const QuerySet& q) {
    std::string out = "{";
    for (std::size_t k = 0; k < q.size(); ++k) {
        if (k > 0) out.push_back(',');
        out += std::to_string(q[k]);
    }
    out.push_back('}');
    return out;
}

} // namespace hsilab
