#pragma once

#include "hsilab/agents/agent.hpp"
#include "hsilab/envs/model.hpp"
#include "hsilab/harness/verify.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace hsilab::harness {

/// Environment named by builder and parameters, or loaded from a model file
/// (builder "file", parameters path and index).
struct EnvSpec {
    std::string name;
    std::string builder;
    ParamMap params;
};

/// One algorithm section with every hyperparameter resolved.
struct AlgoSpec {
    std::string name;
    // optll, opmll
    double theta1 = 0.0;
    double theta2 = 0.0;
    double c_bonus = 1.0;
    // pors
    std::string candidates;
    double beta = 0.0;
    double delta = 0.05;
    std::uint64_t policy_cap = 0;
    // fixed
    std::vector<std::size_t> actions;
    std::size_t query = 0;
    // eps-sequence
    double explore = 0.1;
};

struct VerifySpec {
    std::string instance;
    ParamMap params;
};

struct ExperimentConfig {
    std::string name = "experiment";
    std::size_t episodes = 0;
    std::vector<std::uint64_t> seeds;
    std::uint64_t master_seed = 0;
    std::filesystem::path output = "results";
    std::size_t oracle_cap = 0;
    std::size_t threads = 1;
    bool regret = true;
    /// Earlier episode for the Reg(K) / Reg(checkpoint) summary; 0 selects K/4.
    std::size_t checkpoint = 0;
    EnvSpec env;
    std::vector<AlgoSpec> algos;
    std::vector<VerifySpec> verify;
};

/// Names accepted in [algo ...] headers.
const std::vector<std::string>& algorithm_names();

/// Parses and validates config text; relative model paths resolve against
/// `base`. Throws ConfigError with the offending line when known.
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Replaces the master seed with HSILAB_MASTER_SEED when that variable is set.
void apply_environment_overrides(ExperimentConfig& cfg);

envs::EnvModel build_env(const EnvSpec& spec);

/// Candidate class named by an AlgoSpec: "tiny-class2-grid" or a model file path.
std::vector<envs::EnvModel> load_candidates(const std::string& source);

std::unique_ptr<agents::Agent> make_agent(const AlgoSpec& spec, const envs::EnvModel& env,
                                          std::size_t episodes, std::uint64_t seed);

/// Text form of a config with every default filled in; parses back to the same config.
std::string format_config(const ExperimentConfig& cfg);

} // namespace hsilab::harness
