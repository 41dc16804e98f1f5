#include "hsilab/agents/qtable.hpp"

#include "hsilab/core/errors.hpp"

#include <algorithm>
#include <cmath>

namespace hsilab::agents {

double optimistic_q(double mean_reward, double pv, std::size_t n, double c_bonus, double horizon) {
    if (n == 0) return horizon;
    const double bonus = c_bonus * std::sqrt(horizon * horizon / static_cast<double>(n));
    return std::min(mean_reward + pv + bonus, horizon);
}

QTable::QTable(const Dims& dims, std::size_t query_count, double c_bonus)
    : horizon_(dims.horizon), actions_(dims.actions), queries_(query_count),
      contexts_(1 + dims.query_value_count() * dims.actions), c_bonus_(c_bonus) {
    if (c_bonus < 0.0) throw ParameterError("c_bonus must be non-negative");
    entries_.resize(horizon_ * queries_ * contexts_ * actions_);
    for (auto& e : entries_) e.q = static_cast<double>(horizon_);
}

double QTable::mean_reward(std::size_t step, std::size_t qid, std::size_t ctx, std::size_t a) const {
    const auto& e = entries_[index(step, qid, ctx, a)];
    return e.n == 0 ? 0.0 : e.reward_sum / static_cast<double>(e.n);
}

double QTable::value(std::size_t step, std::size_t qid, std::size_t ctx) const {
    if (step > horizon_) return 0.0;
    double best = entries_[index(step, qid, ctx, 0)].q;
    for (std::size_t a = 1; a < actions_; ++a) best = std::max(best, entries_[index(step, qid, ctx, a)].q);
    return best;
}

std::size_t QTable::greedy(std::size_t step, std::size_t qid, std::size_t ctx) const {
    std::size_t best = 0;
    double best_q = entries_[index(step, qid, ctx, 0)].q;
    for (std::size_t a = 1; a < actions_; ++a) {
        const double v = entries_[index(step, qid, ctx, a)].q;
        if (v > best_q) {
            best_q = v;
            best = a;
        }
    }
    return best;
}

void QTable::record(std::size_t step, std::size_t qid, std::size_t ctx, std::size_t a, double reward,
                    std::size_t next_ctx) {
    auto& e = entries_[index(step, qid, ctx, a)];
    ++e.n;
    e.reward_sum += reward;
    if (step == horizon_) return;
    for (auto& [c, n] : e.next)
        if (c == next_ctx) {
            ++n;
            return;
        }
    e.next.emplace_back(next_ctx, 1);
}

void QTable::refresh(std::size_t qid) {
    const double H = static_cast<double>(horizon_);
    for (std::size_t h = horizon_; h >= 1; --h) {
        for (std::size_t ctx = 0; ctx < contexts_; ++ctx)
            for (std::size_t a = 0; a < actions_; ++a) {
                auto& e = entries_[index(h, qid, ctx, a)];
                if (e.n == 0) {
                    e.q = H;
                    continue;
                }
                double pv = 0.0;
                for (const auto& [c, n] : e.next)
                    pv += static_cast<double>(n) / static_cast<double>(e.n) * value(h + 1, qid, c);
                e.q = optimistic_q(e.reward_sum / static_cast<double>(e.n), pv, e.n, c_bonus_, H);
            }
    }
}

bool QTable::clamp_holds() const {
    const double H = static_cast<double>(horizon_);
    return std::all_of(entries_.begin(), entries_.end(),
                       [&](const Entry& e) { return e.q >= 0.0 && e.q <= H; });
}

bool QTable::counts_consistent() const {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const std::size_t step = i / (queries_ * contexts_ * actions_) + 1;
        if (step == horizon_) continue;
        std::uint64_t total = 0;
        for (const auto& [c, n] : entries_[i].next) total += n;
        if (total != entries_[i].n) return false;
    }
    return true;
}

} // namespace hsilab::agents
