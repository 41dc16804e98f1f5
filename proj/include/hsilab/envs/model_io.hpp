#pragma once

#include "hsilab/envs/model.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace hsilab::envs {

/// Largest state count written by serialize_model.
inline constexpr std::size_t kMaxSerializedStates = 4096;

/// Sectioned text form of a model:
///
///   [model]                 key = value header (name, class, d, alphabet, ...)
///   [initial]               one row of S probabilities
///   [factor h= i= a=]       |S~| rows of |S~| entries (product form only)
///   [transition h= a=]      S rows of S entries (joint form only)
///   [emission h= q=]        O rows of U entries
///   [reward h=]             S rows of A entries
///
/// Numbers carry 17 significant digits so files round-trip exactly.
std::string serialize_model(const EnvModel& m);

/// Parses one or more models; each starts at a [model] section. Every parsed
/// model is re-validated. Errors are ConfigError with the offending line.
std::vector<EnvModel> parse_models(std::string_view text);
EnvModel parse_model(std::string_view text);

void save_model(const EnvModel& m, const std::filesystem::path& path);
std::vector<EnvModel> load_models(const std::filesystem::path& path);

} // namespace hsilab::envs
