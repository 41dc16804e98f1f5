#include "hsilab/oracle/oracle.hpp"

#include "hsilab/core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hsilab::oracle {

using envs::EnvModel;

Belief initial_belief(const EnvModel& m) { return {1, m.initial}; }

namespace {

// Likelihood factor of state s for the given feedback, 0 when inconsistent.
double feedback_weight(const EnvModel& m, std::size_t step, std::size_t s, std::size_t qid,
                       const QuerySet& q, const std::vector<HsiEntry>& hsi,
                       std::optional<std::size_t> observation) {
    for (const auto& e : hsi)
        if (substate_value(s, e.index, m.dims) != e.value) return 0.0;
    if (!m.has_emissions()) return 1.0;
    return m.emission(step, qid, *observation, unqueried_value_index(s, q, m.dims));
}

void check_feedback(const EnvModel& m, const Belief& b, const QuerySet& q,
                    const std::vector<HsiEntry>& hsi, std::optional<std::size_t> observation) {
    if (b.step < 1 || b.step > m.dims.horizon) throw RangeError("belief step out of range");
    if (b.probs.size() != m.state_count()) throw ConsistencyError("belief has wrong length");
    if (q.size() != m.dims.d_query) throw ConsistencyError("query set has wrong size");
    if (hsi.size() != q.size()) throw ConsistencyError("HSI does not match the query set");
    for (std::size_t k = 0; k < hsi.size(); ++k)
        if (hsi[k].index != q[k]) throw ConsistencyError("HSI does not match the query set");
    if (m.has_emissions() != observation.has_value())
        throw ConsistencyError("observation presence does not match the model");
    if (observation && *observation >= m.observations)
        throw ConsistencyError("observation id out of range");
}

} // namespace

Update condition_belief(const EnvModel& m, const Belief& b, const QuerySet& q,
                        const std::vector<HsiEntry>& hsi, std::optional<std::size_t> observation) {
    check_feedback(m, b, q, hsi, observation);
    const std::size_t qid = query_set_id(q, m.dims);
    Update out;
    out.belief.step = b.step;
    out.belief.probs.assign(b.probs.size(), 0.0);
    double mass = 0.0;
    for (std::size_t s = 0; s < b.probs.size(); ++s) {
        if (b.probs[s] == 0.0) continue;
        const double w = b.probs[s] * feedback_weight(m, b.step, s, qid, q, hsi, observation);
        out.belief.probs[s] = w;
        mass += w;
    }
    if (!(mass > 0.0)) throw InfeasibleEvidenceError("feedback has zero probability under the belief");
    for (double& p : out.belief.probs) p /= mass;
    out.evidence = mass;
    return out;
}

Update belief_update(const EnvModel& m, const Belief& b, std::size_t action, const QuerySet& q,
                     const std::vector<HsiEntry>& hsi, std::optional<std::size_t> observation) {
    if (b.step >= m.dims.horizon) throw RangeError("no transition after the last step");
    if (action >= m.dims.actions) throw RangeError("action out of range");
    Update cond = condition_belief(m, b, q, hsi, observation);
    Update out;
    out.evidence = cond.evidence;
    out.belief.step = b.step + 1;
    out.belief.probs.assign(b.probs.size(), 0.0);
    for (std::size_t s = 0; s < b.probs.size(); ++s) {
        const double w = cond.belief.probs[s];
        if (w == 0.0) continue;
        for (const auto& e : m.next(b.step, s, action)) out.belief.probs[e.next] += w * e.prob;
    }
    return out;
}

double trace_log_evidence(const EnvModel& m, const EpisodeTrace& trace) {
    check_trace(m, trace);
    Belief b = initial_belief(m);
    double total = 0.0;
    for (std::size_t h = 1; h <= m.dims.horizon; ++h) {
        const auto& st = trace.steps[h - 1];
        try {
            Update u = h < m.dims.horizon
                           ? belief_update(m, b, st.action, st.query, st.hsi, st.observation)
                           : condition_belief(m, b, st.query, st.hsi, st.observation);
            total += std::log(u.evidence);
            b = std::move(u.belief);
        } catch (const InfeasibleEvidenceError&) {
            return -std::numeric_limits<double>::infinity();
        }
    }
    return total;
}

namespace {

class TreeSolver {
public:
    TreeSolver(const EnvModel& m, std::size_t cap)
        : m_(m), cap_(cap), S_(m.state_count()), queries_(enumerate_query_sets(m.dims)),
          obs_(std::max<std::size_t>(m.observations, 1)),
          branches_(m.dims.query_value_count() * obs_) {
        qval_.resize(queries_.size());
        unq_.resize(queries_.size());
        for (std::size_t qid = 0; qid < queries_.size(); ++qid)
            for (std::size_t s = 0; s < S_; ++s) {
                qval_[qid].push_back(query_value_index(s, queries_[qid], m.dims));
                unq_[qid].push_back(unqueried_value_index(s, queries_[qid], m.dims));
            }
    }

    OracleResult solve() {
        OracleResult res;
        res.value = value(1, m_.initial, &res);
        res.nodes = nodes_;
        res.leaves = leaves_;
        return res;
    }

private:
    double value(std::size_t h, const std::vector<double>& b, OracleResult* top) {
        if (++nodes_ > cap_)
            throw SizeError("belief tree exceeds the cap of " + std::to_string(cap_) + " nodes");
        const std::size_t A = m_.dims.actions;

        std::vector<double> immediate(A, 0.0);
        for (std::size_t s = 0; s < S_; ++s) {
            if (b[s] == 0.0) continue;
            for (std::size_t a = 0; a < A; ++a) immediate[a] += b[s] * m_.reward_mean(h, s, a);
        }

        if (h == m_.dims.horizon) {
            ++leaves_;
            double best = -1.0;
            for (std::size_t a = 0; a < A; ++a)
                if (immediate[a] > best + 1e-12) {
                    best = immediate[a];
                    if (top) {
                        top->first_action = a;
                        top->first_query = queries_.front();
                    }
                }
            return best;
        }

        double best = -1.0;
        std::vector<double> mass(branches_);
        std::vector<std::vector<double>> next(branches_, std::vector<double>(S_));
        for (std::size_t a = 0; a < A; ++a)
            for (std::size_t qid = 0; qid < queries_.size(); ++qid) {
                std::fill(mass.begin(), mass.end(), 0.0);
                for (auto& v : next) std::fill(v.begin(), v.end(), 0.0);
                for (std::size_t s = 0; s < S_; ++s) {
                    if (b[s] == 0.0) continue;
                    const auto row = m_.next(h, s, a);
                    for (std::size_t o = 0; o < obs_; ++o) {
                        const double w = m_.has_emissions()
                                             ? b[s] * m_.emission(h, qid, o, unq_[qid][s])
                                             : b[s];
                        if (w == 0.0) continue;
                        const std::size_t br = qval_[qid][s] * obs_ + o;
                        mass[br] += w;
                        for (const auto& e : row) next[br][e.next] += w * e.prob;
                    }
                }
                double total = immediate[a];
                for (std::size_t br = 0; br < branches_; ++br) {
                    if (mass[br] == 0.0) continue;
                    for (double& p : next[br]) p /= mass[br];
                    total += mass[br] * value(h + 1, next[br], nullptr);
                }
                if (total > best + 1e-12) {
                    best = total;
                    if (top) {
                        top->first_action = a;
                        top->first_query = queries_[qid];
                    }
                }
            }
        return best;
    }

    const EnvModel& m_;
    std::size_t cap_;
    std::size_t S_;
    std::vector<QuerySet> queries_;
    std::size_t obs_;
    std::size_t branches_;
    std::vector<std::vector<std::size_t>> qval_;
    std::vector<std::vector<std::size_t>> unq_;
    std::size_t nodes_ = 0;
    std::size_t leaves_ = 0;
};

} // namespace

OracleResult optimal_value(const EnvModel& m, std::size_t cap) {
    return TreeSolver(m, cap).solve();
}

std::string to_string(RegretMode mode) {
    return mode == RegretMode::Expected ? "expected" : "realized";
}

RegretSeries compute_regret(std::span<const double> episode_values, double v_star, RegretMode mode) {
    RegretSeries out;
    out.mode = mode;
    out.v_star = v_star;
    out.values.assign(episode_values.begin(), episode_values.end());
    double acc = 0.0;
    for (double v : episode_values) {
        acc += v_star - v;
        out.cumulative.push_back(acc);
    }
    return out;
}

void check_trace(const EnvModel& m, const EpisodeTrace& trace) {
    const Dims& dims = m.dims;
    if (trace.steps.size() != dims.horizon)
        throw ConsistencyError("trace length " + std::to_string(trace.steps.size()) +
                               " does not match horizon " + std::to_string(dims.horizon));
    for (const auto& st : trace.steps) {
        if (st.action >= dims.actions) throw ConsistencyError("trace action out of range");
        if (st.query.size() != dims.d_query) throw ConsistencyError("trace query has wrong size");
        for (std::size_t k = 0; k < st.query.size(); ++k)
            if (st.query[k] >= dims.d) throw ConsistencyError("trace query index out of range");
        if (st.hsi.size() != st.query.size()) throw ConsistencyError("trace HSI does not match query");
        for (std::size_t k = 0; k < st.hsi.size(); ++k)
            if (st.hsi[k].index != st.query[k] || st.hsi[k].value >= dims.alphabet)
                throw ConsistencyError("trace HSI does not match query");
        if (st.observation.has_value() != m.has_emissions())
            throw ConsistencyError("trace observation presence does not match the model");
        if (st.observation && *st.observation >= m.observations)
            throw ConsistencyError("trace observation out of range");
    }
}

RegretSeries compute_regret(const EnvModel& m, std::span<const EpisodeTrace> traces, double v_star) {
    std::vector<double> totals;
    totals.reserve(traces.size());
    for (const auto& t : traces) {
        check_trace(m, t);
        totals.push_back(t.total);
    }
    return compute_regret(totals, v_star, RegretMode::Realized);
}

} // namespace hsilab::oracle
