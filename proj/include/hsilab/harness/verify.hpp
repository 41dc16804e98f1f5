#pragma once

#include "hsilab/core/types.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace hsilab::harness {

/// Builder parameters given as key=value tokens.
using ParamMap = std::map<std::string, std::string>;

/// Parses "key=value" tokens; throws ConfigError on malformed or repeated keys.
ParamMap parse_params(const std::vector<std::string>& tokens);

struct PropertyCheck {
    std::string name;
    bool passed = false;
    /// Measured value on success, witness on failure.
    std::string detail;
};

struct VerifyReport {
    std::string instance;
    std::vector<PropertyCheck> checks;

    bool passed() const;
    std::string format() const;
};

/// Every group-a state shares some d_query-subset of values with some
/// group-b state, and vice versa.
PropertyCheck check_shared_subset(const std::vector<StateVector>& a, const std::vector<StateVector>& b,
                                  std::size_t d_query);

/// Every group-a state is covered coordinate-wise by d_query-subsets taken
/// from group-b states, and vice versa.
PropertyCheck check_assembled(const std::vector<StateVector>& a, const std::vector<StateVector>& b,
                              std::size_t d_query);

/// Runs the structural checks of a named instance: "groups" (d, d_query),
/// "flat-emission" (epsilon), "tree" (alphabet, d, actions, epsilon, h0, m_star).
/// Throws ConfigError for unknown instances or parameters.
VerifyReport verify_instance(const std::string& name, const ParamMap& params);

} // namespace hsilab::harness
