#pragma once

#include "hsilab/core/types.hpp"

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace hsilab::agents {

/// min{ mean_r + pv + c sqrt(H^2 / n), H }, or H when n = 0.
double optimistic_q(double mean_reward, double pv, std::size_t n, double c_bonus, double horizon);

/// Optimistic tabular Q over keys (step, query id, context).
///
/// Feedback about s_h arrives only after acting at step h, so the decision at
/// step h can condition on the HSI of step h-1 and the action taken there. The
/// context encodes exactly that: 0 at step 1, otherwise
/// 1 + value_index * A + previous_action.
class QTable {
public:
    QTable() = default;
    QTable(const Dims& dims, std::size_t query_count, double c_bonus);

    std::size_t context_count() const noexcept { return contexts_; }
    std::size_t context_after(std::size_t value_index, std::size_t action) const {
        return 1 + value_index * actions_ + action;
    }

    double q(std::size_t step, std::size_t qid, std::size_t ctx, std::size_t a) const {
        return entries_[index(step, qid, ctx, a)].q;
    }
    std::uint64_t visits(std::size_t step, std::size_t qid, std::size_t ctx, std::size_t a) const {
        return entries_[index(step, qid, ctx, a)].n;
    }
    /// Empirical mean reward at the key, 0 when unvisited.
    double mean_reward(std::size_t step, std::size_t qid, std::size_t ctx, std::size_t a) const;
    /// Observed successor contexts with counts.
    const std::vector<std::pair<std::size_t, std::uint64_t>>&
    successors(std::size_t step, std::size_t qid, std::size_t ctx, std::size_t a) const {
        return entries_[index(step, qid, ctx, a)].next;
    }

    /// max_a Q at the key; 0 beyond the horizon.
    double value(std::size_t step, std::size_t qid, std::size_t ctx) const;
    /// argmax_a Q with ties broken toward the lowest action.
    std::size_t greedy(std::size_t step, std::size_t qid, std::size_t ctx) const;

    /// Adds one visit. `next_ctx` is ignored at the last step.
    void record(std::size_t step, std::size_t qid, std::size_t ctx, std::size_t a, double reward,
                std::size_t next_ctx);

    /// Recomputes every Q of one query id by backward induction.
    void refresh(std::size_t qid);

    /// True when every stored Q lies in [0, H].
    bool clamp_holds() const;
    /// True when each visit count equals the sum of its successor counts (steps < H).
    bool counts_consistent() const;

    std::size_t horizon() const noexcept { return horizon_; }
    std::size_t actions() const noexcept { return actions_; }
    double c_bonus() const noexcept { return c_bonus_; }

private:
    struct Entry {
        std::uint64_t n = 0;
        double reward_sum = 0.0;
        double q = 0.0;
        std::vector<std::pair<std::size_t, std::uint64_t>> next;
    };

    std::size_t index(std::size_t step, std::size_t qid, std::size_t ctx, std::size_t a) const {
        return (((step - 1) * queries_ + qid) * contexts_ + ctx) * actions_ + a;
    }

    std::size_t horizon_ = 0;
    std::size_t actions_ = 0;
    std::size_t queries_ = 0;
    std::size_t contexts_ = 0;
    double c_bonus_ = 1.0;
    std::vector<Entry> entries_;
};

} // namespace hsilab::agents
