#include "hsilab/harness/config.hpp"

#include "hsilab/agents/baselines.hpp"
#include "hsilab/agents/learners.hpp"
#include "hsilab/agents/weights.hpp"
#include "hsilab/core/errors.hpp"
#include "hsilab/core/numfmt.hpp"
#include "hsilab/envs/builders.hpp"
#include "hsilab/envs/model_io.hpp"
#include "hsilab/oracle/oracle.hpp"
#include "hsilab/pors/pors.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace hsilab::harness {

using envs::EnvModel;

const std::vector<std::string>& algorithm_names() {
    static const std::vector<std::string> names{"optll", "opmll", "pors", "uniform", "fixed", "eps-sequence"};
    return names;
}

namespace {

struct Entry {
    std::string key;
    std::string value;
    std::size_t line = 0;
};

struct Section {
    std::string kind;
    std::string arg;
    std::size_t line = 0;
    std::vector<Entry> entries;
};

std::vector<Section> split_sections(std::string_view text) {
    std::vector<Section> out;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
            std::string_view inner = trim(line.substr(1, line.size() - 2));
            Section s;
            s.line = line_no;
            const auto sp = inner.find_first_of(" \t");
            s.kind = std::string(inner.substr(0, sp));
            if (sp != std::string_view::npos) s.arg = std::string(trim(inner.substr(sp)));
            out.push_back(std::move(s));
            continue;
        }
        if (out.empty()) throw ConfigError("key outside of any section", line_no);
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError("expected key = value", line_no);
        Entry e{std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))), line_no};
        if (e.key.empty()) throw ConfigError("empty key", line_no);
        if (e.value.empty()) throw ConfigError("empty value for '" + e.key + "'", line_no);
        out.back().entries.push_back(std::move(e));
    }
    return out;
}

std::vector<std::string> tokens(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream in{std::string(s)};
    std::string t;
    while (in >> t) out.push_back(t);
    return out;
}

// Typed access to the entries of one section; rejects unknown or repeated keys.
class Reader {
public:
    explicit Reader(const Section& s) : s_(s) {
        std::set<std::string> seen;
        for (const auto& e : s.entries)
            if (!seen.insert(e.key).second) throw ConfigError("duplicate key '" + e.key + "'", e.line);
    }

    const Entry* find(const std::string& key) {
        used_.insert(key);
        for (const auto& e : s_.entries)
            if (e.key == key) return &e;
        return nullptr;
    }

    template <class F>
    auto convert(const Entry& e, F&& f) -> decltype(f(e.value)) {
        try {
            return f(e.value);
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& ex) {
            throw ConfigError("bad value for '" + e.key + "': " + ex.what(), e.line);
        }
    }

    std::size_t count(const std::string& key, std::size_t fallback) {
        const Entry* e = find(key);
        return e ? convert(*e, [](const std::string& v) { return parse_count(v); }) : fallback;
    }
    double number(const std::string& key, double fallback) {
        const Entry* e = find(key);
        return e ? convert(*e, [](const std::string& v) { return parse_number(v); }) : fallback;
    }
    std::string text(const std::string& key, const std::string& fallback) {
        const Entry* e = find(key);
        return e ? e->value : fallback;
    }
    bool flag(const std::string& key, bool fallback) {
        const Entry* e = find(key);
        if (!e) return fallback;
        if (e->value == "on" || e->value == "true") return true;
        if (e->value == "off" || e->value == "false") return false;
        throw ConfigError("expected on or off for '" + key + "'", e->line);
    }
    std::size_t line_of(const std::string& key) const {
        for (const auto& e : s_.entries)
            if (e.key == key) return e.line;
        return s_.line;
    }
    void finish() const {
        for (const auto& e : s_.entries)
            if (!used_.count(e.key)) throw ConfigError("unknown key '" + e.key + "' in [" + s_.kind + "]", e.line);
    }

private:
    const Section& s_;
    std::set<std::string> used_;
};

std::vector<std::uint64_t> parse_seeds(const Entry& e) {
    std::vector<std::uint64_t> out;
    std::string list = e.value;
    std::replace(list.begin(), list.end(), ',', ' ');
    for (const auto& t : tokens(list)) {
        try {
            if (auto dots = t.find(".."); dots != std::string::npos) {
                const std::size_t lo = parse_count(t.substr(0, dots));
                const std::size_t hi = parse_count(t.substr(dots + 2));
                if (hi < lo) throw ConfigError("empty seed range '" + t + "'", e.line);
                for (std::size_t s = lo; s <= hi; ++s) out.push_back(s);
            } else {
                out.push_back(parse_count(t));
            }
        } catch (const ParameterError& ex) {
            throw ConfigError(std::string("bad seed: ") + ex.what(), e.line);
        }
    }
    std::set<std::uint64_t> distinct(out.begin(), out.end());
    if (out.empty()) throw ConfigError("seed list is empty", e.line);
    if (distinct.size() != out.size()) throw ConfigError("seeds must be distinct", e.line);
    return out;
}

bool is_class1_compatible(const EnvModel& m) {
    return !m.has_emissions() && (m.tag == envs::ClassTag::Class1 || m.tag == envs::ClassTag::Generic);
}

void check_compatible(const AlgoSpec& a, const EnvModel& m, const std::string& env_name, std::size_t line) {
    auto fail = [&](const std::string& why) {
        throw ConfigError("algorithm '" + a.name + "' is incompatible with env '" + env_name + "': " + why, line);
    };
    if (a.name == "optll") {
        if (!is_class1_compatible(m)) fail("needs a Class1 or Generic model without emissions");
        if (m.dims.d_query != 1) fail("needs d_query = 1");
    } else if (a.name == "opmll") {
        if (!is_class1_compatible(m)) fail("needs a Class1 or Generic model without emissions");
        if (m.dims.d_query < 2) fail("needs d_query > 1");
    } else if (a.name == "pors") {
        if (m.tag != envs::ClassTag::Class2) fail("needs a Class2 model");
    } else if (a.name == "fixed") {
        if (a.actions.size() != m.dims.horizon) fail("fixed action list must have length H");
        for (std::size_t x : a.actions)
            if (x >= m.dims.actions) fail("fixed action out of range");
        if (a.query >= enumerate_query_sets(m.dims).size()) fail("fixed query id out of range");
    }
}

AlgoSpec read_algo(const Section& s, const EnvModel& env, std::size_t K) {
    Reader r(s);
    AlgoSpec a;
    a.name = s.arg;
    if (std::find(algorithm_names().begin(), algorithm_names().end(), a.name) == algorithm_names().end())
        throw ConfigError("unknown algorithm '" + a.name + "'", s.line);
    if (r.text("tie_rule", "lowest") != "lowest")
        throw ConfigError("only tie_rule = lowest is supported", r.line_of("tie_rule"));
    const Dims& dims = env.dims;
    if (a.name == "optll" || a.name == "opmll") {
        a.c_bonus = r.number("c_bonus", 1.0);
        a.theta1 = r.number("theta1", agents::default_theta1(dims.d, dims.horizon, K));
        if (a.name == "opmll") a.theta2 = r.number("theta2", agents::default_theta2(dims.d, dims.d_query, a.theta1));
        if (!(a.theta1 > 0.0 && a.theta1 <= 1.0)) throw ConfigError("theta1 must lie in (0, 1]", r.line_of("theta1"));
        if (a.name == "opmll" && !(a.theta2 > 0.0 && a.theta2 <= 1.0))
            throw ConfigError("theta2 must lie in (0, 1]", r.line_of("theta2"));
        if (!(a.c_bonus >= 0.0)) throw ConfigError("c_bonus must be non-negative", r.line_of("c_bonus"));
    } else if (a.name == "pors") {
        const Entry* c = r.find("candidates");
        if (!c) throw ConfigError("pors needs a candidates entry", s.line);
        a.candidates = c->value;
        a.delta = r.number("delta", 0.05);
        if (!(a.delta > 0.0 && a.delta < 1.0)) throw ConfigError("delta must lie in (0, 1)", r.line_of("delta"));
        const double scale = r.number("beta_scale", 1.0);
        a.beta = r.number("beta", -1.0);
        if (a.beta < 0.0) a.beta = pors::default_beta(dims, env.observations, K, a.delta, scale);
        a.policy_cap = r.count("policy_cap", pors::kDefaultPolicyCap);
    } else if (a.name == "fixed") {
        const Entry* e = r.find("actions");
        if (!e) throw ConfigError("fixed needs an actions entry", s.line);
        for (const auto& t : tokens(e->value))
            a.actions.push_back(r.convert(*e, [&](const std::string&) { return parse_count(t); }));
        a.query = r.count("query", 0);
    } else if (a.name == "eps-sequence") {
        a.explore = r.number("explore", 0.1);
        if (!(a.explore >= 0.0 && a.explore <= 1.0))
            throw ConfigError("explore must lie in [0, 1]", r.line_of("explore"));
    }
    r.finish();
    return a;
}

std::size_t param_count(const ParamMap& p, const std::string& key, std::size_t fallback) {
    auto it = p.find(key);
    return it == p.end() ? fallback : parse_count(it->second);
}

double param_number(const ParamMap& p, const std::string& key, double fallback) {
    auto it = p.find(key);
    return it == p.end() ? fallback : parse_number(it->second);
}

void require_keys(const ParamMap& p, const std::string& builder, std::initializer_list<const char*> keys) {
    for (const auto& [k, v] : p) {
        bool ok = false;
        for (const char* allowed : keys) ok = ok || k == allowed;
        if (!ok) throw ConfigError("unknown parameter '" + k + "' for builder " + builder);
    }
}

} // namespace

EnvModel build_env(const EnvSpec& spec) {
    const ParamMap& p = spec.params;
    const std::string& b = spec.builder;
    EnvModel m;
    if (b == "groups") {
        require_keys(p, b, {"d", "d_query", "epsilon", "actions"});
        m = envs::build_hard_instance_groups(param_count(p, "d", 2), param_number(p, "epsilon", 0.1),
                                             {param_count(p, "d_query", 1), param_count(p, "actions", 2)});
    } else if (b == "flat-emission") {
        require_keys(p, b, {"epsilon"});
        m = envs::build_hard_instance_flat_emission(param_number(p, "epsilon", 0.1));
    } else if (b == "tree") {
        require_keys(p, b, {"alphabet", "d", "actions", "epsilon", "h0", "m_star", "horizon", "d_query"});
        envs::TreeParams t;
        t.alphabet = param_count(p, "alphabet", t.alphabet);
        t.d = param_count(p, "d", t.d);
        t.actions = param_count(p, "actions", t.actions);
        t.epsilon = param_number(p, "epsilon", t.epsilon);
        t.h0 = param_count(p, "h0", t.h0);
        t.m_star = param_count(p, "m_star", t.m_star);
        t.horizon = param_count(p, "horizon", t.horizon);
        t.d_query = param_count(p, "d_query", t.d_query);
        m = envs::build_hard_instance_tree(t);
    } else if (b == "random-independent" || b == "random-class2") {
        require_keys(p, b, {"d", "alphabet", "d_query", "horizon", "actions", "model_seed", "observations"});
        const Dims dims = Dims::make(param_count(p, "d", 3), param_count(p, "alphabet", 2),
                                     param_count(p, "d_query", 1), param_count(p, "horizon", 3),
                                     param_count(p, "actions", 2));
        SampleRng rng(param_count(p, "model_seed", 1), Stream::Model);
        if (b == "random-class2") {
            m = envs::random_class2_model(dims, param_count(p, "observations", 2), rng);
        } else {
            if (p.count("observations")) throw ConfigError("observations only applies to random-class2");
            m = envs::random_independent_model(dims, rng);
        }
    } else if (b == "correlated-pair") {
        require_keys(p, b, {});
        m = envs::build_correlated_pair();
    } else if (b == "tiny-class2") {
        require_keys(p, b, {"stay", "good_after_action1", "accuracy"});
        envs::TinyClass2Params t;
        t.stay = param_number(p, "stay", t.stay);
        t.good_after_action1 = param_number(p, "good_after_action1", t.good_after_action1);
        t.accuracy = param_number(p, "accuracy", t.accuracy);
        m = envs::build_tiny_class2(t);
    } else if (b == "file") {
        require_keys(p, b, {"path", "index"});
        auto it = p.find("path");
        if (it == p.end()) throw ConfigError("file builder needs a path");
        auto models = envs::load_models(it->second);
        const std::size_t index = param_count(p, "index", 0);
        if (index >= models.size()) throw ConfigError("model index out of range");
        m = std::move(models[index]);
    } else {
        throw ConfigError("unknown builder '" + b + "'");
    }
    return m;
}

std::vector<EnvModel> load_candidates(const std::string& source) {
    if (source == "tiny-class2-grid") return envs::tiny_class2_grid();
    return envs::load_models(source);
}

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base) {
    const auto sections = split_sections(text);
    ExperimentConfig cfg;
    const Section* experiment = nullptr;
    const Section* env = nullptr;
    const Section* verify = nullptr;
    std::vector<const Section*> algos;
    std::set<std::string> algo_names;
    for (const auto& s : sections) {
        auto once = [&](const Section*& slot) {
            if (slot) throw ConfigError("section [" + s.kind + "] appears twice", s.line);
            if (!s.arg.empty()) throw ConfigError("section [" + s.kind + "] takes no argument", s.line);
            slot = &s;
        };
        if (s.kind == "experiment") once(experiment);
        else if (s.kind == "env") once(env);
        else if (s.kind == "verify") once(verify);
        else if (s.kind == "algo") {
            if (s.arg.empty()) throw ConfigError("[algo] needs a name", s.line);
            if (!algo_names.insert(s.arg).second) throw ConfigError("algorithm '" + s.arg + "' listed twice", s.line);
            algos.push_back(&s);
        } else {
            throw ConfigError("unknown section [" + s.kind + "]", s.line);
        }
    }
    if (!experiment) throw ConfigError("missing [experiment] section");
    if (!env) throw ConfigError("missing [env] section");

    {
        Reader r(*experiment);
        cfg.name = r.text("name", cfg.name);
        const Entry* k = r.find("episodes");
        if (!k) throw ConfigError("episodes is required", experiment->line);
        cfg.episodes = r.count("episodes", 0);
        if (cfg.episodes == 0) throw ConfigError("episodes must be at least 1", k->line);
        const Entry* seeds = r.find("seeds");
        if (!seeds) throw ConfigError("seeds is required", experiment->line);
        cfg.seeds = parse_seeds(*seeds);
        cfg.master_seed = r.count("master_seed", 0);
        cfg.output = r.text("output", "results");
        if (cfg.output.is_relative() && !base.empty()) cfg.output = base / cfg.output;
        cfg.oracle_cap = r.count("oracle_cap", oracle::kDefaultOracleCap);
        cfg.threads = r.count("threads", 1);
        if (cfg.threads == 0) throw ConfigError("threads must be at least 1", r.line_of("threads"));
        cfg.regret = r.flag("regret", true);
        cfg.checkpoint = r.count("checkpoint", std::max<std::size_t>(cfg.episodes / 4, 1));
        if (cfg.checkpoint == 0 || cfg.checkpoint > cfg.episodes)
            throw ConfigError("checkpoint must lie in [1, episodes]", r.line_of("checkpoint"));
        r.finish();
    }

    EnvModel model;
    {
        std::set<std::string> seen;
        for (const auto& e : env->entries) {
            if (!seen.insert(e.key).second) throw ConfigError("duplicate key '" + e.key + "'", e.line);
            if (e.key == "builder") cfg.env.builder = e.value;
            else if (e.key == "name") cfg.env.name = e.value;
            else if (e.key == "path") {
                std::filesystem::path p = e.value;
                if (p.is_relative() && !base.empty()) p = base / p;
                cfg.env.params[e.key] = p.string();
            } else cfg.env.params[e.key] = e.value;
        }
        if (cfg.env.builder.empty()) throw ConfigError("[env] needs a builder", env->line);
        if (cfg.env.name.empty()) cfg.env.name = cfg.env.builder;
        try {
            model = build_env(cfg.env);
        } catch (const ConfigError& ex) {
            throw ConfigError(ex.what(), env->line);
        } catch (const Error& ex) {
            throw ConfigError(std::string("cannot build env: ") + ex.what(), env->line);
        }
    }

    for (const Section* s : algos) {
        AlgoSpec a;
        try {
            a = read_algo(*s, model, cfg.episodes);
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& ex) {
            throw ConfigError(ex.what(), s->line);
        }
        check_compatible(a, model, cfg.env.name, s->line);
        if (a.name == "pors") {
            std::filesystem::path p = a.candidates;
            if (a.candidates != "tiny-class2-grid" && p.is_relative() && !base.empty()) a.candidates = (base / p).string();
            try {
                auto cands = load_candidates(a.candidates);
                for (auto& c : cands) (void)pors::with_known_parts(std::move(c), model);
                (void)pors::PolicySpace(model.dims, model.observations, a.policy_cap);
            } catch (const Error& ex) {
                throw ConfigError(std::string("pors setup: ") + ex.what(), s->line);
            }
        }
        cfg.algos.push_back(std::move(a));
    }
    if (cfg.algos.empty() && !verify) throw ConfigError("config lists no algorithm");

    if (verify) {
        for (const auto& e : verify->entries) {
            if (e.key != "instance") throw ConfigError("unknown key '" + e.key + "' in [verify]", e.line);
            auto toks = tokens(e.value);
            VerifySpec v;
            v.instance = toks.front();
            try {
                v.params = parse_params({toks.begin() + 1, toks.end()});
            } catch (const ConfigError& ex) {
                throw ConfigError(ex.what(), e.line);
            }
            cfg.verify.push_back(std::move(v));
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

void apply_environment_overrides(ExperimentConfig& cfg) {
    if (const char* v = std::getenv("HSILAB_MASTER_SEED")) {
        try {
            cfg.master_seed = parse_count(v);
        } catch (const Error&) {
            throw ConfigError("HSILAB_MASTER_SEED is not a non-negative integer");
        }
    }
}

std::unique_ptr<agents::Agent> make_agent(const AlgoSpec& spec, const EnvModel& env, std::size_t episodes,
                                          std::uint64_t seed) {
    if (spec.name == "optll" || spec.name == "opmll") {
        agents::LearnerConfig lc;
        lc.theta1 = spec.theta1;
        lc.theta2 = spec.theta2;
        lc.c_bonus = spec.c_bonus;
        lc.episodes = episodes;
        if (spec.name == "optll") return std::make_unique<agents::OpTllAgent>(env.dims, lc, seed);
        return std::make_unique<agents::OpMllAgent>(env.dims, lc, seed);
    }
    if (spec.name == "pors") {
        pors::PorsConfig pc;
        pc.beta = spec.beta;
        pc.delta = spec.delta;
        pc.episodes = episodes;
        pc.policy_cap = spec.policy_cap;
        return std::make_unique<pors::PorsAgent>(env, load_candidates(spec.candidates), pc);
    }
    if (spec.name == "uniform") return std::make_unique<agents::UniformRandomAgent>(env.dims, seed);
    if (spec.name == "fixed")
        return std::make_unique<agents::FixedSequenceAgent>(env.dims, spec.actions,
                                                            enumerate_query_sets(env.dims).at(spec.query));
    if (spec.name == "eps-sequence")
        return std::make_unique<agents::EpsilonGreedySequenceAgent>(env.dims, spec.explore, seed);
    throw ConfigError("unknown algorithm '" + spec.name + "'");
}

std::string format_config(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << "[experiment]\n";
    os << "name = " << cfg.name << '\n';
    os << "episodes = " << cfg.episodes << '\n';
    os << "seeds =";
    for (auto s : cfg.seeds) os << ' ' << s;
    os << '\n';
    os << "master_seed = " << cfg.master_seed << '\n';
    os << "output = " << cfg.output.string() << '\n';
    os << "oracle_cap = " << cfg.oracle_cap << '\n';
    os << "threads = " << cfg.threads << '\n';
    os << "regret = " << (cfg.regret ? "on" : "off") << '\n';
    os << "checkpoint = " << cfg.checkpoint << '\n';
    os << "\n[env]\n";
    os << "builder = " << cfg.env.builder << '\n';
    os << "name = " << cfg.env.name << '\n';
    for (const auto& [k, v] : cfg.env.params) os << k << " = " << v << '\n';
    for (const auto& a : cfg.algos) {
        os << "\n[algo " << a.name << "]\n";
        if (a.name == "optll" || a.name == "opmll") {
            os << "theta1 = " << format_exact(a.theta1) << '\n';
            if (a.name == "opmll") os << "theta2 = " << format_exact(a.theta2) << '\n';
            os << "c_bonus = " << format_exact(a.c_bonus) << '\n';
        } else if (a.name == "pors") {
            os << "candidates = " << a.candidates << '\n';
            os << "beta = " << format_exact(a.beta) << '\n';
            os << "delta = " << format_exact(a.delta) << '\n';
            os << "policy_cap = " << a.policy_cap << '\n';
        } else if (a.name == "fixed") {
            os << "actions =";
            for (auto x : a.actions) os << ' ' << x;
            os << "\nquery = " << a.query << '\n';
        } else if (a.name == "eps-sequence") {
            os << "explore = " << format_exact(a.explore) << '\n';
        }
    }
    if (!cfg.verify.empty()) {
        os << "\n[verify]\n";
        for (const auto& v : cfg.verify) {
            os << "instance = " << v.instance;
            for (const auto& [k, val] : v.params) os << ' ' << k << '=' << val;
            os << '\n';
        }
    }
    return os.str();
}

} // namespace hsilab::harness
