#pragma once

#include "hsilab/harness/config.hpp"
#include "hsilab/oracle/oracle.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hsilab::harness {

struct ResultRow {
    std::string algo;
    std::string env;
    std::uint64_t seed = 0;
    std::size_t episode = 0;
    double reward = 0.0;
    double cum_reward = 0.0;
    /// Cumulative regret through this episode; nullopt when regret is off.
    std::optional<double> regret;
};

struct AlgoSummary {
    std::string algo;
    std::string mode;
    std::size_t runs = 0;
    std::size_t episodes = 0;
    std::size_t checkpoint = 0;
    double mean_final = 0.0;
    double sd_final = 0.0;
    double mean_checkpoint = 0.0;
    /// Mean and sample deviation over runs of Reg(K) / Reg(checkpoint).
    double mean_ratio = 0.0;
    double sd_ratio = 0.0;
};

struct ResultsTable {
    std::vector<ResultRow> rows;
    /// Ordered key/value metadata (regret modes, V*, policy families).
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<AlgoSummary> summary;
};

/// hash(master seed, algo name, env name, seed value).
std::uint64_t derive_run_seed(std::uint64_t master, const std::string& algo, const std::string& env,
                              std::uint64_t seed);

/// Runs every (algo, seed) pair for K episodes. Regret is in expected mode for
/// agents that report exact policy values and realized mode otherwise. Rows are
/// sorted by (algo, seed, episode) whatever the thread count.
ResultsTable run_suite(const ExperimentConfig& cfg);

/// Per-algo Reg(K) statistics and Reg(K)/Reg(checkpoint) ratios.
std::vector<AlgoSummary> summarize(const std::vector<ResultRow>& rows, std::size_t checkpoint,
                                   const std::map<std::string, std::string>& modes = {});

inline constexpr const char* kCsvHeader = "algo,env,seed,episode,reward,cum_reward,regret";

std::string format_results_csv(const std::vector<ResultRow>& rows);
void write_results_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path);
std::vector<ResultRow> read_results_csv(const std::filesystem::path& path);
std::vector<ResultRow> parse_results_csv(std::string_view text);

std::string format_summary(const ResultsTable& table);

/// Writes results.csv, meta.txt, summary.txt and regret.svg into cfg.output.
void write_outputs(const ResultsTable& table, const ExperimentConfig& cfg);

/// Self-contained SVG of cumulative regret per episode: faint per-seed traces
/// and a mean line per algorithm.
std::string render_regret_svg(const std::vector<ResultRow>& rows, const std::string& title = "cumulative regret");
void emit_plot_svg(const std::vector<ResultRow>& rows, const std::filesystem::path& path);

} // namespace hsilab::harness
