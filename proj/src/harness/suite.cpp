#include "hsilab/harness/suite.hpp"

#include "hsilab/core/errors.hpp"
#include "hsilab/core/numfmt.hpp"
#include "hsilab/core/rng.hpp"
#include "hsilab/pors/pors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace hsilab::harness {

using envs::EnvModel;

std::uint64_t derive_run_seed(std::uint64_t master, const std::string& algo, const std::string& env,
                              std::uint64_t seed) {
    return mix_seed(mix_seed(mix_seed(master, hash_string(algo)), hash_string(env)), seed);
}

namespace {

struct RunOutput {
    std::vector<ResultRow> rows;
    std::string mode;
    std::string family;
};

RunOutput run_one(const ExperimentConfig& cfg, const AlgoSpec& spec, const EnvModel& env,
                  std::optional<double> v_star, std::uint64_t seed) {
    const std::uint64_t run_seed = derive_run_seed(cfg.master_seed, spec.name, cfg.env.name, seed);
    auto agent = make_agent(spec, env, cfg.episodes, run_seed);
    envs::EnvStreams streams(run_seed);

    RunOutput out;
    out.rows.reserve(cfg.episodes);
    bool expected = true;
    double cum_reward = 0.0, cum_expected = 0.0, cum_realized = 0.0;
    std::vector<double> realized_regret;
    for (std::size_t k = 1; k <= cfg.episodes; ++k) {
        auto ep = agents::run_evaluated_episode(*agent, env, k, streams);
        cum_reward += ep.trace.total;
        ResultRow row{spec.name, cfg.env.name, seed, k, ep.trace.total, cum_reward, std::nullopt};
        if (v_star) {
            cum_realized += *v_star - ep.trace.total;
            realized_regret.push_back(cum_realized);
            if (ep.policy_value) cum_expected += *v_star - *ep.policy_value;
            else expected = false;
            row.regret = cum_expected;
        }
        out.rows.push_back(std::move(row));
    }
    if (!v_star) {
        out.mode = "none";
    } else if (expected) {
        out.mode = oracle::to_string(oracle::RegretMode::Expected);
    } else {
        out.mode = oracle::to_string(oracle::RegretMode::Realized);
        for (std::size_t k = 0; k < out.rows.size(); ++k) out.rows[k].regret = realized_regret[k];
    }
    if (auto* p = dynamic_cast<const pors::PorsAgent*>(agent.get())) out.family = p->space().family();
    return out;
}

bool row_less(const ResultRow& a, const ResultRow& b) {
    if (a.algo != b.algo) return a.algo < b.algo;
    if (a.seed != b.seed) return a.seed < b.seed;
    return a.episode < b.episode;
}

} // namespace

ResultsTable run_suite(const ExperimentConfig& cfg) {
    const EnvModel env = build_env(cfg.env);
    ResultsTable table;
    table.meta.emplace_back("experiment", cfg.name);
    table.meta.emplace_back("env", cfg.env.name);
    table.meta.emplace_back("builder", cfg.env.builder);
    table.meta.emplace_back("class", envs::to_string(env.tag));
    table.meta.emplace_back("episodes", std::to_string(cfg.episodes));
    table.meta.emplace_back("master_seed", std::to_string(cfg.master_seed));

    std::optional<double> v_star;
    if (cfg.regret) {
        const auto orc = oracle::optimal_value(env, cfg.oracle_cap);
        v_star = orc.value;
        table.meta.emplace_back("v_star", format_exact(orc.value));
        table.meta.emplace_back("oracle_nodes", std::to_string(orc.nodes));
    }

    struct Job {
        std::size_t algo;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (std::size_t a = 0; a < cfg.algos.size(); ++a)
        for (auto s : cfg.seeds) jobs.push_back({a, s});

    std::vector<RunOutput> outputs(jobs.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t j; (j = next.fetch_add(1)) < jobs.size();) {
            try {
                outputs[j] = run_one(cfg, cfg.algos[jobs[j].algo], env, v_star, jobs[j].seed);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const std::size_t n_threads = std::min(cfg.threads, std::max<std::size_t>(jobs.size(), 1));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    std::map<std::string, std::string> modes;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        const std::string& algo = cfg.algos[jobs[j].algo].name;
        auto [it, fresh] = modes.emplace(algo, outputs[j].mode);
        if (!fresh && it->second != outputs[j].mode) it->second = "mixed";
        if (!outputs[j].family.empty() && j % cfg.seeds.size() == 0)
            table.meta.emplace_back("policy_family." + algo, outputs[j].family);
        for (auto& r : outputs[j].rows) table.rows.push_back(std::move(r));
    }
    for (const auto& [algo, mode] : modes) table.meta.emplace_back("regret_mode." + algo, mode);
    std::stable_sort(table.rows.begin(), table.rows.end(), row_less);
    table.summary = summarize(table.rows, cfg.checkpoint, modes);
    return table;
}

std::vector<AlgoSummary> summarize(const std::vector<ResultRow>& rows, std::size_t checkpoint,
                                   const std::map<std::string, std::string>& modes) {
    struct Run {
        std::optional<double> final, at_checkpoint;
        std::size_t episodes = 0;
    };
    std::map<std::string, std::map<std::uint64_t, Run>> runs;
    for (const auto& r : rows) {
        Run& run = runs[r.algo][r.seed];
        if (r.episode >= run.episodes) {
            run.episodes = r.episode;
            run.final = r.regret;
        }
        if (r.episode == checkpoint) run.at_checkpoint = r.regret;
    }
    std::vector<AlgoSummary> out;
    for (const auto& [algo, by_seed] : runs) {
        AlgoSummary s;
        s.algo = algo;
        auto it = modes.find(algo);
        s.mode = it == modes.end() ? "" : it->second;
        s.checkpoint = checkpoint;
        std::vector<double> finals, checks, ratios;
        for (const auto& [seed, run] : by_seed) {
            s.episodes = std::max(s.episodes, run.episodes);
            if (!run.final) continue;
            finals.push_back(*run.final);
            if (run.at_checkpoint) {
                checks.push_back(*run.at_checkpoint);
                if (*run.at_checkpoint > 0.0) ratios.push_back(*run.final / *run.at_checkpoint);
            }
        }
        s.runs = by_seed.size();
        auto mean = [](const std::vector<double>& v) {
            double t = 0.0;
            for (double x : v) t += x;
            return v.empty() ? std::nan("") : t / static_cast<double>(v.size());
        };
        auto sd = [&](const std::vector<double>& v) {
            if (v.size() < 2) return 0.0;
            const double m = mean(v);
            double t = 0.0;
            for (double x : v) t += (x - m) * (x - m);
            return std::sqrt(t / static_cast<double>(v.size() - 1));
        };
        s.mean_final = mean(finals);
        s.sd_final = sd(finals);
        s.mean_checkpoint = mean(checks);
        s.mean_ratio = mean(ratios);
        s.sd_ratio = sd(ratios);
        out.push_back(std::move(s));
    }
    return out;
}

std::string format_results_csv(const std::vector<ResultRow>& rows) {
    std::string out = std::string(kCsvHeader) + "\n";
    for (const auto& r : rows) {
        out += r.algo + ',' + r.env + ',' + std::to_string(r.seed) + ',' + std::to_string(r.episode) + ',' +
               format_number(r.reward, 9) + ',' + format_number(r.cum_reward, 9) + ',' +
               (r.regret ? format_number(*r.regret, 9) : std::string()) + '\n';
    }
    return out;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
    if (!out) throw ConfigError("cannot write " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

void write_results_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path) {
    write_text(path, format_results_csv(rows));
}

std::vector<ResultRow> parse_results_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || trim(line) != kCsvHeader) throw ConfigError("missing results header", 1);
    std::vector<ResultRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> f;
        std::size_t start = 0;
        for (std::size_t c; (c = line.find(',', start)) != std::string::npos; start = c + 1)
            f.push_back(line.substr(start, c - start));
        f.push_back(std::string(trim(std::string_view(line).substr(start))));
        if (f.size() != 7) throw ConfigError("expected 7 fields", line_no);
        try {
            ResultRow r{f[0], f[1], parse_count(f[2]), parse_count(f[3]), parse_number(f[4]), parse_number(f[5]),
                        std::nullopt};
            if (!f[6].empty()) r.regret = parse_number(f[6]);
            rows.push_back(std::move(r));
        } catch (const ParameterError& ex) {
            throw ConfigError(ex.what(), line_no);
        }
    }
    return rows;
}

std::vector<ResultRow> read_results_csv(const std::filesystem::path& path) {
    return parse_results_csv(read_text(path));
}

std::string format_summary(const ResultsTable& table) {
    std::ostringstream os;
    for (const auto& s : table.summary) {
        os << "algo: " << s.algo << '\n';
        os << "  regret_mode: " << s.mode << '\n';
        os << "  runs: " << s.runs << '\n';
        os << "  episodes: " << s.episodes << '\n';
        os << "  mean_regret_final: " << format_number(s.mean_final, 9) << '\n';
        os << "  sd_regret_final: " << format_number(s.sd_final, 9) << '\n';
        os << "  checkpoint: " << s.checkpoint << '\n';
        os << "  mean_regret_checkpoint: " << format_number(s.mean_checkpoint, 9) << '\n';
        os << "  mean_ratio_final_over_checkpoint: " << format_number(s.mean_ratio, 9) << '\n';
        os << "  sd_ratio_final_over_checkpoint: " << format_number(s.sd_ratio, 9) << '\n';
    }
    return os.str();
}

void write_outputs(const ResultsTable& table, const ExperimentConfig& cfg) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.output, ec);
    if (ec) throw ConfigError("cannot create " + cfg.output.string() + ": " + ec.message());
    write_results_csv(table.rows, cfg.output / "results.csv");
    std::string meta;
    for (const auto& [k, v] : table.meta) meta += k + ": " + v + '\n';
    write_text(cfg.output / "meta.txt", meta);
    write_text(cfg.output / "summary.txt", format_summary(table));
    emit_plot_svg(table.rows, cfg.output / "regret.svg");
}

namespace {

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

// shortest decimal with at most 4 significant digits for tick labels
std::string tick(double x) { return format_number(x, 4); }

double nice_step(double span) {
    if (!(span > 0.0)) return 1.0;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (raw <= m * mag) return m * mag;
    return 10.0 * mag;
}

} // namespace

std::string render_regret_svg(const std::vector<ResultRow>& rows, const std::string& title) {
    constexpr double W = 800, Hh = 500, L = 80, R = 160, T = 40, B = 60;
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

    std::map<std::string, std::map<std::uint64_t, std::vector<std::pair<double, double>>>> series;
    double max_x = 1.0, max_y = 0.0;
    for (const auto& r : rows) {
        if (!r.regret) continue;
        series[r.algo][r.seed].emplace_back(static_cast<double>(r.episode), *r.regret);
        max_x = std::max(max_x, static_cast<double>(r.episode));
        max_y = std::max(max_y, *r.regret);
    }
    double min_y = 0.0;
    for (const auto& r : rows)
        if (r.regret) min_y = std::min(min_y, *r.regret);
    if (max_y <= min_y) max_y = min_y + 1.0;

    auto px = [&](double x) { return L + (x - 1.0) / std::max(max_x - 1.0, 1.0) * (W - L - R); };
    auto py = [&](double y) { return Hh - B - (y - min_y) / (max_y - min_y) * (Hh - T - B); };
    auto pt = [&](double x, double y) { return format_number(px(x), 6) + "," + format_number(py(y), 6); };

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << Hh << "\" viewBox=\"0 0 "
       << W << ' ' << Hh << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
       << xml_escape(title) << "</text>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << Hh - B << "\" x2=\"" << W - R << "\" y2=\"" << Hh - B
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << Hh - B << "\" stroke=\"black\"/>\n";

    const double xs = nice_step(max_x - 1.0);
    for (double x = 0.0; x <= max_x; x += xs) {
        const double xv = std::max(x, 1.0);
        os << "<text x=\"" << format_number(px(xv), 6) << "\" y=\"" << Hh - B + 18
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << tick(xv) << "</text>\n";
    }
    const double ys = nice_step(max_y - min_y);
    for (double y = std::ceil(min_y / ys) * ys; y <= max_y + 1e-12; y += ys) {
        os << "<text x=\"" << L - 6 << "\" y=\"" << format_number(py(y) + 4, 6)
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << tick(y) << "</text>\n";
        os << "<line x1=\"" << L << "\" y1=\"" << format_number(py(y), 6) << "\" x2=\"" << W - R << "\" y2=\""
           << format_number(py(y), 6) << "\" stroke=\"#dddddd\"/>\n";
    }
    os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << Hh - 16
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">episode</text>\n";
    os << "<text x=\"20\" y=\"" << (T + Hh - B) / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       << "font-size=\"13\" transform=\"rotate(-90 20 " << (T + Hh - B) / 2 << ")\">cumulative regret</text>\n";

    if (series.empty())
        os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << (T + Hh - B) / 2
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">no regret data</text>\n";

    std::size_t colour = 0;
    for (const auto& [algo, by_seed] : series) {
        const char* c = palette[colour % std::size(palette)];
        std::map<double, std::pair<double, std::size_t>> mean;
        for (const auto& [seed, pts] : by_seed) {
            const std::size_t stride = std::max<std::size_t>(pts.size() / 500, 1);
            os << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-opacity=\"0.2\" stroke-width=\"1\" points=\"";
            for (std::size_t i = 0; i < pts.size(); i += stride) os << pt(pts[i].first, pts[i].second) << ' ';
            os << pt(pts.back().first, pts.back().second) << "\"/>\n";
            for (const auto& [x, y] : pts) {
                auto& m = mean[x];
                m.first += y;
                ++m.second;
            }
        }
        const std::size_t stride = std::max<std::size_t>(mean.size() / 500, 1);
        os << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"2.5\" points=\"";
        std::size_t i = 0;
        for (const auto& [x, m] : mean)
            if (i++ % stride == 0 || i == mean.size()) os << pt(x, m.first / static_cast<double>(m.second)) << ' ';
        os << "\"/>\n";
        const double ly = T + 20.0 * static_cast<double>(colour);
        os << "<line x1=\"" << W - R + 15 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 40 << "\" y2=\"" << ly
           << "\" stroke=\"" << c << "\" stroke-width=\"2.5\"/>\n";
        os << "<text x=\"" << W - R + 46 << "\" y=\"" << ly + 4 << "\" font-family=\"sans-serif\" font-size=\"12\">"
           << xml_escape(algo) << "</text>\n";
        ++colour;
    }
    os << "</svg>\n";
    return os.str();
}

void emit_plot_svg(const std::vector<ResultRow>& rows, const std::filesystem::path& path) {
    write_text(path, render_regret_svg(rows));
}

} // namespace hsilab::harness
