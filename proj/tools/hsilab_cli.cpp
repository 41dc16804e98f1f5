// Command-line front end: run, oracle, verify, plot.
// Exit codes: 0 success, 1 config or parameter error, 2 verification failure.

#include "hsilab/core/errors.hpp"
#include "hsilab/core/numfmt.hpp"
#include "hsilab/harness/config.hpp"
#include "hsilab/harness/suite.hpp"
#include "hsilab/harness/verify.hpp"
#include "hsilab/oracle/oracle.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace hsilab;

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kVerifyFailed = 2;

int cmd_run(const std::string& path, std::size_t threads, const std::string& output) {
    auto cfg = harness::load_config(path);
    harness::apply_environment_overrides(cfg);
    if (threads > 0) cfg.threads = threads;
    if (!output.empty()) cfg.output = output;

    bool verified = true;
    for (const auto& v : cfg.verify) {
        const auto report = harness::verify_instance(v.instance, v.params);
        std::cout << report.format();
        verified = verified && report.passed();
    }
    if (!verified) return kVerifyFailed;
    if (cfg.algos.empty()) return kOk;

    const auto table = harness::run_suite(cfg);
    harness::write_outputs(table, cfg);
    for (const auto& [k, v] : table.meta) std::cout << k << ": " << v << '\n';
    std::cout << harness::format_summary(table);
    std::cout << "output: " << cfg.output.string() << '\n';
    return kOk;
}

int cmd_oracle(const std::string& path) {
    auto cfg = harness::load_config(path);
    const auto env = harness::build_env(cfg.env);
    const auto r = oracle::optimal_value(env, cfg.oracle_cap);
    std::cout << "env: " << cfg.env.name << '\n';
    std::cout << "v_star: " << format_exact(r.value) << '\n';
    std::cout << "first_action: " << r.first_action << '\n';
    std::cout << "first_query: " << format_query(r.first_query) << '\n';
    std::cout << "nodes: " << r.nodes << '\n';
    std::cout << "leaves: " << r.leaves << '\n';
    return kOk;
}

int cmd_verify(const std::string& instance, const std::vector<std::string>& params) {
    const auto report = harness::verify_instance(instance, harness::parse_params(params));
    std::cout << report.format();
    return report.passed() ? kOk : kVerifyFailed;
}

int cmd_plot(const std::string& csv, const std::string& svg) {
    harness::emit_plot_svg(harness::read_results_csv(csv), svg);
    std::cout << "wrote " << svg << '\n';
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Episodic POMDP laboratory with partial hindsight state information"};
    app.require_subcommand(1);

    std::string config_path, output, instance, csv_path, svg_path;
    std::size_t threads = 0;
    std::vector<std::string> params;

    auto* run = app.add_subcommand("run", "run every algorithm and seed of a config");
    run->add_option("config", config_path, "experiment config")->required();
    run->add_option("--threads", threads, "worker threads (overrides the config)");
    run->add_option("--output", output, "output directory (overrides the config)");

    auto* orc = app.add_subcommand("oracle", "exact optimal value of the config's environment");
    orc->add_option("config", config_path, "experiment config")->required();

    auto* ver = app.add_subcommand("verify", "structural checks of a named instance");
    ver->add_option("instance", instance, "groups, flat-emission or tree")->required();
    ver->add_option("params", params, "key=value parameters");

    auto* plot = app.add_subcommand("plot", "SVG of cumulative regret from a results CSV");
    plot->add_option("csv", csv_path, "results CSV")->required();
    plot->add_option("-o,--output", svg_path, "SVG path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*run) return cmd_run(config_path, threads, output);
        if (*orc) return cmd_oracle(config_path);
        if (*ver) return cmd_verify(instance, params);
        if (*plot) return cmd_plot(csv_path, svg_path);
    } catch (const hsilab::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    }
    return kConfigError;
}
