#include "hsilab/agents/weights.hpp"

#include "hsilab/core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hsilab::agents {

namespace {

void check_reward(double r, std::size_t horizon) {
    if (!(r >= 0.0 && r <= static_cast<double>(horizon)))
        throw ParameterError("episode reward " + std::to_string(r) + " outside [0, H]");
}

// Keeps weights finite; probabilities depend only on ratios.
void rescale(std::vector<double>& w) {
    const double top = *std::max_element(w.begin(), w.end());
    if (top > 1e200)
        for (double& x : w) x /= top;
}

} // namespace

std::size_t block_length(std::size_t d, std::size_t d_query) {
    if (d_query <= 1) return 1;
    return (d - 1 + d_query - 2) / (d_query - 1);
}

WeightState make_weight_state(std::size_t d, std::size_t d_query, double theta1, double theta2) {
    if (d == 0 || d_query == 0 || d_query > d) throw ParameterError("invalid weight-state dimensions");
    if (!(theta1 > 0.0 && theta1 <= 1.0)) throw ParameterError("theta1 must lie in (0, 1]");
    if (d_query > 1 && !(theta2 > 0.0 && theta2 <= 1.0))
        throw ParameterError("theta2 must lie in (0, 1]");
    WeightState ws;
    ws.global_w.assign(d, 1.0);
    ws.global_p.assign(d, 1.0 / static_cast<double>(d));
    ws.local_w.assign(d, 1.0);
    ws.theta1 = theta1;
    ws.theta2 = theta2;
    ws.kappa = block_length(d, d_query);
    return ws;
}

void recompute_global_p(WeightState& ws) {
    const double d = static_cast<double>(ws.global_w.size());
    const double total = std::accumulate(ws.global_w.begin(), ws.global_w.end(), 0.0);
    for (std::size_t i = 0; i < ws.global_w.size(); ++i)
        ws.global_p[i] = (1.0 - ws.theta1) * ws.global_w[i] / total + ws.theta1 / d;
}

void optll_update(WeightState& ws, std::size_t chosen, double episode_reward, std::size_t horizon) {
    check_reward(episode_reward, horizon);
    if (chosen >= ws.global_w.size()) throw ParameterError("chosen sub-state out of range");
    const double d = static_cast<double>(ws.global_w.size());
    const double p = ws.global_p[chosen];
    ws.global_w[chosen] *= std::exp(ws.theta1 * episode_reward / (d * p));
    rescale(ws.global_w);
    recompute_global_p(ws);
}

void opmll_global_update(WeightState& ws, std::size_t k, const std::vector<BlockEpisode>& block,
                         std::size_t d_query, std::size_t horizon) {
    if (k == 0 || (k - 1) % ws.kappa != 0)
        throw ScheduleError("global update requested at episode " + std::to_string(k) +
                            ", which does not open a block of length " + std::to_string(ws.kappa));
    if (d_query < 2) throw ParameterError("the block update needs d_query > 1");
    const std::size_t d = ws.global_w.size();
    const double factor = static_cast<double>(d - 1) * ws.theta1 /
                          (static_cast<double>(d) * static_cast<double>(d_query - 1));
    std::vector<double> sums(d, 0.0);
    for (const auto& ep : block) {
        check_reward(ep.reward, horizon);
        for (std::size_t i : ep.query.indices()) sums[i] += ep.reward;
    }
    for (std::size_t i = 0; i < d; ++i) ws.global_w[i] *= std::exp(factor * sums[i]);
    rescale(ws.global_w);
    recompute_global_p(ws);
}

void opmll_start_block(WeightState& ws, SampleRng& rng) {
    ws.leader = rng.categorical(ws.global_p);
    ws.block_pool.clear();
    for (std::size_t i = 0; i < ws.global_w.size(); ++i)
        if (i != ws.leader) ws.block_pool.push_back(i);
    ws.local_w = ws.global_w;
}

namespace {

std::size_t take_from(std::vector<std::size_t>& pool, SampleRng& rng) {
    const std::size_t k = rng.uniform_index(pool.size());
    const std::size_t v = pool[k];
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(k));
    return v;
}

} // namespace

QuerySet opmll_select_supporting(WeightState& ws, std::size_t leader, std::size_t d_query,
                                 SampleRng& rng) {
    if (d_query < 2) throw ParameterError("supporter selection needs d_query > 1");
    const std::size_t d = ws.global_w.size();
    if (leader >= d || d_query > d) throw ParameterError("invalid leader or query size");
    std::vector<std::size_t> chosen = {leader};
    std::erase(ws.block_pool, leader);
    while (chosen.size() < d_query) {
        if (ws.block_pool.empty()) {
            for (std::size_t i = 0; i < d; ++i)
                if (std::find(chosen.begin(), chosen.end(), i) == chosen.end()) ws.block_pool.push_back(i);
        }
        chosen.push_back(take_from(ws.block_pool, rng));
    }
    ws.current = QuerySet::make_any(std::move(chosen), d);
    recompute_local_p(ws);
    return ws.current;
}

void recompute_local_p(WeightState& ws) {
    const double n = static_cast<double>(ws.current.size());
    double total = 0.0;
    for (std::size_t i : ws.current.indices()) total += ws.local_w[i];
    ws.local_p.clear();
    for (std::size_t i : ws.current.indices())
        ws.local_p.push_back((1.0 - ws.theta2) * ws.local_w[i] / total + ws.theta2 / n);
}

void opmll_local_update(WeightState& ws, double episode_reward, std::size_t horizon) {
    check_reward(episode_reward, horizon);
    const double n = static_cast<double>(ws.current.size());
    for (std::size_t i : ws.current.indices()) ws.local_w[i] *= std::exp(ws.theta2 * episode_reward / n);
    rescale(ws.local_w);
    recompute_local_p(ws);
}

double default_theta1(std::size_t d, std::size_t horizon, std::size_t episodes) {
    const double dd = static_cast<double>(d);
    const double hh = static_cast<double>(horizon);
    const double theta = std::sqrt(dd * std::log(dd) / (hh * hh * static_cast<double>(episodes)));
    return std::clamp(theta, 1e-12, 1.0);
}

double default_theta2(std::size_t d, std::size_t d_query, double theta1) {
    if (d_query < 2) return theta1;
    return std::min(1.0, 16.0 * static_cast<double>(d - 1) / static_cast<double>(d_query - 1) * theta1);
}

} // namespace hsilab::agents
