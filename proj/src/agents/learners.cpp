#include "hsilab/agents/learners.hpp"

#include "hsilab/core/errors.hpp"

#include <algorithm>

namespace hsilab::agents {

namespace {

constexpr double kFloorSlack = 1e-15;

LearnerConfig resolve(const Dims& dims, LearnerConfig cfg) {
    if (cfg.episodes == 0) throw ParameterError("planned episode count must be positive");
    if (cfg.theta1 == 0.0) cfg.theta1 = default_theta1(dims.d, dims.horizon, cfg.episodes);
    if (cfg.theta2 == 0.0) cfg.theta2 = default_theta2(dims.d, dims.d_query, cfg.theta1);
    return cfg;
}

bool floor_holds(const std::vector<double>& p, double floor) {
    return std::all_of(p.begin(), p.end(), [&](double x) { return x >= floor - kFloorSlack; });
}

} // namespace

OptimisticQLayer::OptimisticQLayer(const Dims& dims, double c_bonus)
    : dims_(dims), queries_(enumerate_query_sets(dims)), table_(dims, queries_.size(), c_bonus),
      value_cache_(queries_.size()) {}

void OptimisticQLayer::start(std::size_t qid) {
    qid_ = qid;
    ctx_ = 0;
    start_value_ = table_.value(1, qid, 0);
}

std::size_t OptimisticQLayer::decide(std::size_t step) {
    last_action_ = table_.greedy(step, qid_, ctx_);
    return last_action_;
}

void OptimisticQLayer::observe(std::size_t step, const Feedback& fb) {
    const std::size_t next = table_.context_after(query_value_index(fb.hsi, dims_.alphabet), last_action_);
    table_.record(step, qid_, ctx_, last_action_, fb.reward, next);
    ctx_ = next;
}

void OptimisticQLayer::finish() {
    table_.refresh(qid_);
    value_cache_[qid_].reset();
}

double OptimisticQLayer::greedy_value(const envs::EnvModel& truth, std::size_t qid) const {
    if (cache_owner_ != &truth) {
        std::fill(value_cache_.begin(), value_cache_.end(), std::nullopt);
        cache_owner_ = &truth;
    }
    if (!value_cache_[qid]) {
        value_cache_[qid] = evaluate_reactive_policy(
            truth, queries_[qid], [&](std::size_t h, std::size_t c) { return table_.greedy(h, qid, c); });
    }
    return *value_cache_[qid];
}

OpTllAgent::OpTllAgent(const Dims& dims, const LearnerConfig& cfg, std::uint64_t seed)
    : dims_(dims), q_(dims, resolve(dims, cfg).c_bonus), rng_(seed, Stream::Agent) {
    if (dims.d_query != 1) throw ParameterError("optll needs d_query = 1");
    const LearnerConfig c = resolve(dims, cfg);
    ws_ = make_weight_state(dims.d, 1, c.theta1, c.theta2);
}

void OpTllAgent::begin_episode(std::size_t) {
    chosen_ = rng_.categorical(ws_.global_p);
    // query sets of size one are enumerated in index order
    q_.start(chosen_);
}

Decision OpTllAgent::decide(std::size_t step) {
    return {q_.decide(step), q_.queries()[chosen_]};
}

void OpTllAgent::observe(std::size_t step, const Feedback& feedback) { q_.observe(step, feedback); }

void OpTllAgent::end_episode(const EpisodeTrace& trace) {
    optll_update(ws_, chosen_, trace.total, dims_.horizon);
    q_.finish();
    check_invariants();
}

void OpTllAgent::check_invariants() {
    ++stats_.checks;
    if (!floor_holds(ws_.global_p, ws_.theta1 / static_cast<double>(dims_.d))) ++stats_.floor_violations;
    if (!q_.table().clamp_holds()) ++stats_.clamp_violations;
    if (!q_.table().counts_consistent()) ++stats_.count_violations;
}

std::optional<double> OpTllAgent::policy_value(const envs::EnvModel& truth) const {
    double v = 0.0;
    for (std::size_t i = 0; i < dims_.d; ++i) v += ws_.global_p[i] * q_.greedy_value(truth, i);
    return v;
}

OpMllAgent::OpMllAgent(const Dims& dims, const LearnerConfig& cfg, std::uint64_t seed)
    : dims_(dims), q_(dims, resolve(dims, cfg).c_bonus), rng_(seed, Stream::Agent),
      supported_(dims.d, false) {
    if (dims.d_query < 2) throw ParameterError("opmll needs d_query > 1");
    const LearnerConfig c = resolve(dims, cfg);
    ws_ = make_weight_state(dims.d, dims.d_query, c.theta1, c.theta2);
}

void OpMllAgent::begin_episode(std::size_t k) {
    if ((k - 1) % ws_.kappa == 0) {
        if (k > 1) opmll_global_update(ws_, k, block_, dims_.d_query, dims_.horizon);
        block_.clear();
        std::fill(supported_.begin(), supported_.end(), false);
        opmll_start_block(ws_, rng_);
    }
    const QuerySet q = opmll_select_supporting(ws_, ws_.leader, dims_.d_query, rng_);
    for (std::size_t i : q.indices())
        if (i != ws_.leader) supported_[i] = true;
    rewarding_ = q[rng_.categorical(ws_.local_p)];
    q_.start(query_set_id(q, dims_));
}

Decision OpMllAgent::decide(std::size_t step) {
    return {q_.decide(step), ws_.current};
}

void OpMllAgent::observe(std::size_t step, const Feedback& feedback) { q_.observe(step, feedback); }

void OpMllAgent::end_episode(const EpisodeTrace& trace) {
    opmll_local_update(ws_, trace.total, dims_.horizon);
    block_.push_back({ws_.current, trace.total});
    q_.finish();
    if (block_.size() == ws_.kappa) {
        ++stats_.blocks_completed;
        for (std::size_t i = 0; i < dims_.d; ++i)
            if (i != ws_.leader && !supported_[i]) {
                ++stats_.coverage_violations;
                break;
            }
    }
    check_invariants();
}

void OpMllAgent::check_invariants() {
    ++stats_.checks;
    if (!floor_holds(ws_.global_p, ws_.theta1 / static_cast<double>(dims_.d)) ||
        !floor_holds(ws_.local_p, ws_.theta2 / static_cast<double>(dims_.d_query)))
        ++stats_.floor_violations;
    if (!q_.table().clamp_holds()) ++stats_.clamp_violations;
    if (!q_.table().counts_consistent()) ++stats_.count_violations;
}

std::optional<double> OpMllAgent::policy_value(const envs::EnvModel& truth) const {
    return q_.greedy_value(truth, q_.current_qid());
}

} // namespace hsilab::agents
