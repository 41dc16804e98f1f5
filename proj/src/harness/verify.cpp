#include "hsilab/harness/verify.hpp"

#include "hsilab/core/errors.hpp"
#include "hsilab/core/numfmt.hpp"
#include "hsilab/envs/builders.hpp"
#include "hsilab/envs/diagnostics.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace hsilab::harness {

using envs::EnvModel;

ParamMap parse_params(const std::vector<std::string>& tokens) {
    ParamMap out;
    for (const auto& tok : tokens) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("expected key=value, got '" + tok + "'");
        std::string key(trim(std::string_view(tok).substr(0, eq)));
        std::string value(trim(std::string_view(tok).substr(eq + 1)));
        if (!out.emplace(key, value).second) throw ConfigError("parameter '" + key + "' given twice");
    }
    return out;
}

bool VerifyReport::passed() const {
    for (const auto& c : checks)
        if (!c.passed) return false;
    return true;
}

std::string VerifyReport::format() const {
    std::ostringstream os;
    os << "instance: " << instance << '\n';
    for (const auto& c : checks) os << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    os << "result: " << (passed() ? "pass" : "fail") << '\n';
    return os.str();
}

namespace {

std::vector<QuerySet> subsets(std::size_t d, std::size_t k) {
    return enumerate_query_sets(Dims::make(d, 1, k, 1, 1));
}

bool agree_on(const StateVector& x, const StateVector& y, const QuerySet& q) {
    for (std::size_t i : q.indices())
        if (x.values[i] != y.values[i]) return false;
    return true;
}

std::string show(const StateVector& x) {
    std::string s = "(";
    for (std::size_t i = 0; i < x.values.size(); ++i) s += (i ? "," : "") + std::to_string(x.values[i]);
    return s + ")";
}

// empty string when the property holds one way, else a witness
std::string shared_witness(const std::vector<StateVector>& from, const std::vector<StateVector>& to,
                           const std::vector<QuerySet>& qs, const char* label) {
    for (std::size_t n = 0; n < from.size(); ++n) {
        bool found = false;
        for (const auto& y : to)
            for (const auto& q : qs)
                if (agree_on(from[n], y, q)) found = true;
        if (!found) return std::string(label) + " state " + std::to_string(n + 1) + " " + show(from[n]) +
                           " shares no subset with the other group";
    }
    return {};
}

std::string assembled_witness(const std::vector<StateVector>& from, const std::vector<StateVector>& to,
                              const std::vector<QuerySet>& qs, std::size_t d, const char* label) {
    for (std::size_t n = 0; n < from.size(); ++n) {
        std::vector<bool> covered(d, false);
        for (const auto& y : to)
            for (const auto& q : qs)
                if (agree_on(from[n], y, q))
                    for (std::size_t i : q.indices()) covered[i] = true;
        for (std::size_t i = 0; i < d; ++i)
            if (!covered[i])
                return std::string(label) + " state " + std::to_string(n + 1) + " " + show(from[n]) +
                       " has coordinate " + std::to_string(i) + " uncovered";
    }
    return {};
}

std::size_t dimension_of(const std::vector<StateVector>& a, const std::vector<StateVector>& b) {
    if (a.empty() || b.empty()) throw ParameterError("both groups must be non-empty");
    const std::size_t d = a.front().values.size();
    for (const auto* g : {&a, &b})
        for (const auto& x : *g)
            if (x.values.size() != d) throw ParameterError("states of different lengths");
    return d;
}

} // namespace

PropertyCheck check_shared_subset(const std::vector<StateVector>& a, const std::vector<StateVector>& b,
                                  std::size_t d_query) {
    const std::size_t d = dimension_of(a, b);
    const auto qs = subsets(d, d_query);
    std::string w = shared_witness(a, b, qs, "group a");
    if (w.empty()) w = shared_witness(b, a, qs, "group b");
    return {"shared-subset", w.empty(), w.empty() ? std::to_string(a.size() + b.size()) + " states checked" : w};
}

PropertyCheck check_assembled(const std::vector<StateVector>& a, const std::vector<StateVector>& b,
                              std::size_t d_query) {
    const std::size_t d = dimension_of(a, b);
    const auto qs = subsets(d, d_query);
    std::string w = assembled_witness(a, b, qs, d, "group a");
    if (w.empty()) w = assembled_witness(b, a, qs, d, "group b");
    return {"assembled-combination", w.empty(),
            w.empty() ? std::to_string(a.size() + b.size()) + " states checked" : w};
}

namespace {

class Params {
public:
    explicit Params(const ParamMap& p) : p_(p) {}

    std::size_t count(const std::string& key, std::size_t fallback) {
        used_.insert(key);
        auto it = p_.find(key);
        return it == p_.end() ? fallback : parse_count(it->second);
    }
    double number(const std::string& key, double fallback) {
        used_.insert(key);
        auto it = p_.find(key);
        return it == p_.end() ? fallback : parse_number(it->second);
    }
    void finish(const std::string& instance) const {
        for (const auto& [k, v] : p_)
            if (!used_.count(k)) throw ConfigError("unknown parameter '" + k + "' for instance " + instance);
    }

private:
    const ParamMap& p_;
    std::set<std::string> used_;
};

VerifyReport verify_groups(Params& p) {
    const std::size_t d = p.count("d", 3);
    const std::size_t dq = p.count("d_query", 1);
    const double eps = p.number("epsilon", 0.1);
    p.finish("groups");

    VerifyReport r;
    r.instance = "groups d=" + std::to_string(d) + " d_query=" + std::to_string(dq);
    const auto reps = envs::group_representations(d, dq);
    const std::vector<StateVector> a(reps.begin(), reps.begin() + reps.size() / 2);
    const std::vector<StateVector> b(reps.begin() + reps.size() / 2, reps.end());
    r.checks.push_back(check_shared_subset(a, b, dq));
    r.checks.push_back(check_assembled(a, b, dq));

    const EnvModel m = envs::build_hard_instance_groups(d, eps, {dq, 2});
    std::set<std::size_t> distinct;
    for (const auto& s : reps) distinct.insert(encode_state(s, m.dims).value);
    r.checks.push_back({"distinct-states", distinct.size() == reps.size(),
                        std::to_string(distinct.size()) + " of " + std::to_string(reps.size())});
    return r;
}

VerifyReport verify_flat(Params& p) {
    const double eps = p.number("epsilon", 0.1);
    p.finish("flat-emission");

    VerifyReport r;
    r.instance = "flat-emission";
    const EnvModel m = envs::build_hard_instance_flat_emission(eps);
    const std::size_t Q = m.query_count();
    const std::size_t U = m.dims.unqueried_count();
    std::string witness;
    for (std::size_t h = 1; h <= m.dims.horizon && witness.empty(); ++h)
        for (std::size_t q = 0; q < Q && witness.empty(); ++q)
            for (std::size_t o = 0; o < m.observations && witness.empty(); ++o)
                for (std::size_t u = 1; u < U; ++u)
                    if (m.emission(h, q, o, u) != m.emission(h, q, o, 0)) {
                        witness = "step " + std::to_string(h) + " query " + std::to_string(q) + " column " +
                                  std::to_string(u) + " differs";
                        break;
                    }
    r.checks.push_back({"identical-columns", witness.empty(), witness.empty() ? "all columns equal" : witness});
    const double sigma = envs::min_partial_singular_value(m);
    r.checks.push_back({"min-partial-singular-value", sigma == 0.0, format_number(sigma, 9)});
    return r;
}

VerifyReport verify_tree(Params& p) {
    envs::TreeParams tp;
    tp.alphabet = p.count("alphabet", tp.alphabet);
    tp.d = p.count("d", tp.d);
    tp.actions = p.count("actions", tp.actions);
    tp.epsilon = p.number("epsilon", tp.epsilon);
    tp.h0 = p.count("h0", tp.h0);
    tp.m_star = p.count("m_star", tp.m_star);
    p.finish("tree");

    const EnvModel m = envs::build_hard_instance_tree(tp);
    const std::size_t S = m.state_count(), A = m.dims.actions, H = m.dims.horizon;
    const std::size_t depth = envs::tree_depth(S, A);
    const std::size_t h0 = tp.h0 == 0 ? depth + 1 : tp.h0;

    VerifyReport r;
    r.instance = "tree alphabet=" + std::to_string(tp.alphabet) + " d=" + std::to_string(tp.d) +
                 " actions=" + std::to_string(A);

    // fan-out: deterministic rows and every state reached at step depth + 1
    std::string witness;
    std::set<std::size_t> frontier{0};
    for (std::size_t h = 1; h <= depth; ++h) {
        std::set<std::size_t> next;
        for (std::size_t s : frontier)
            for (std::size_t a = 0; a < A; ++a) {
                const auto row = m.next(h, s, a);
                if (row.size() != 1 || row[0].prob != 1.0)
                    witness = "non-deterministic row at step " + std::to_string(h);
                else
                    next.insert(row[0].next);
            }
        frontier = std::move(next);
    }
    if (witness.empty() && frontier.size() != S)
        witness = std::to_string(frontier.size()) + " of " + std::to_string(S) + " states reached";
    r.checks.push_back({"fan-out", witness.empty(),
                        witness.empty() ? "depth " + std::to_string(depth) + ", all states reached" : witness});

    witness.clear();
    for (std::size_t h = depth + 1; h < H && witness.empty(); ++h)
        for (std::size_t s = 1; s < S; ++s) {
            std::size_t stays = 0;
            for (std::size_t a = 0; a < A; ++a) {
                const auto row = m.next(h, s, a);
                if (row.size() == 1 && row[0].next == s) ++stays;
                else if (row.size() != 1 || row[0].next != 0) witness = "state " + std::to_string(s) + " neither stays nor resets";
            }
            if (stays != 1) witness = "state " + std::to_string(s) + " has " + std::to_string(stays) + " staying actions";
        }
    r.checks.push_back({"stay-or-reset", witness.empty(), witness.empty() ? "one staying action per state" : witness});

    std::size_t starred = 0;
    witness.clear();
    for (std::size_t h = 1; h <= H; ++h)
        for (std::size_t s = 0; s < S; ++s)
            for (std::size_t a = 0; a < A; ++a) {
                const double v = m.reward_mean(h, s, a);
                if (h == h0 && std::abs(v - (0.5 + tp.epsilon)) < 1e-15) ++starred;
                else if (v != 0.0 && !(h == h0 && v == 0.5))
                    witness = "unexpected reward mean " + format_number(v, 9) + " at step " + std::to_string(h);
            }
    if (witness.empty() && starred != 1) witness = std::to_string(starred) + " cells carry 1/2 + epsilon";
    r.checks.push_back({"single-rewarded-cell", witness.empty(),
                        witness.empty() ? "one cell at step " + std::to_string(h0) : witness});
    return r;
}

} // namespace

VerifyReport verify_instance(const std::string& name, const ParamMap& params) {
    Params p(params);
    if (name == "groups") return verify_groups(p);
    if (name == "flat-emission") return verify_flat(p);
    if (name == "tree") return verify_tree(p);
    throw ConfigError("unknown instance '" + name + "'");
}

} // namespace hsilab::harness
