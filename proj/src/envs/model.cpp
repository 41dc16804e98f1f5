#include "hsilab/envs/model.hpp"

#include "hsilab/core/errors.hpp"

#include <cmath>

namespace hsilab::envs {

std::string to_string(ClassTag tag) {
    switch (tag) {
    case ClassTag::Class1: return "class1";
    case ClassTag::Class2: return "class2";
    case ClassTag::Generic: return "generic";
    }
    return "generic";
}

ClassTag parse_class_tag(std::string_view s) {
    if (s == "class1") return ClassTag::Class1;
    if (s == "class2") return ClassTag::Class2;
    if (s == "generic") return ClassTag::Generic;
    throw ParameterError("unknown class tag '" + std::string(s) + "'");
}

TransitionTable TransitionTable::from_function(std::size_t steps, std::size_t states,
                                               std::size_t actions, const RowFn& fn) {
    TransitionTable t;
    t.steps_ = steps;
    t.states_ = states;
    t.actions_ = actions;
    t.offsets_.reserve(steps * states * actions + 1);
    t.offsets_.push_back(0);
    std::vector<Transition> row;
    for (std::size_t h = 1; h <= steps; ++h)
        for (std::size_t s = 0; s < states; ++s)
            for (std::size_t a = 0; a < actions; ++a) {
                row.clear();
                fn(h, s, a, row);
                for (const auto& e : row)
                    if (e.prob != 0.0) t.entries_.push_back(e);
                t.offsets_.push_back(t.entries_.size());
            }
    return t;
}

std::span<const Transition> TransitionTable::row(std::size_t step, std::size_t s,
                                                 std::size_t a) const {
    if (step < 1 || step > steps_)
        throw RangeError("no transition at step " + std::to_string(step));
    const std::size_t r = ((step - 1) * states_ + s) * actions_ + a;
    return {entries_.data() + offsets_[r], offsets_[r + 1] - offsets_[r]};
}

ProductKernel::ProductKernel(std::size_t steps, std::size_t d, std::size_t alphabet,
                             std::size_t actions)
    : steps_(steps), d_(d), alphabet_(alphabet), actions_(actions),
      probs_(steps * d * alphabet * actions * alphabet, 0.0) {}

std::size_t ProductKernel::offset(std::size_t step, std::size_t i, SubValue v,
                                  std::size_t a) const {
    return ((((step - 1) * d_ + i) * alphabet_ + v) * actions_ + a) * alphabet_;
}

double& ProductKernel::at(std::size_t step, std::size_t i, SubValue v, std::size_t a,
                          SubValue next) {
    return probs_[offset(step, i, v, a) + next];
}

double ProductKernel::at(std::size_t step, std::size_t i, SubValue v, std::size_t a,
                         SubValue next) const {
    return probs_[offset(step, i, v, a) + next];
}

std::span<const double> ProductKernel::row(std::size_t step, std::size_t i, SubValue v,
                                           std::size_t a) const {
    return {probs_.data() + offset(step, i, v, a), alphabet_};
}

TransitionTable ProductKernel::expand(const Dims& dims) const {
    const std::size_t S = dims.state_count();
    std::vector<std::size_t> place(d_);
    for (std::size_t i = 0; i < d_; ++i) place[i] = checked_pow(alphabet_, i);

    return TransitionTable::from_function(
        steps_, S, actions_,
        [&](std::size_t h, std::size_t s, std::size_t a, std::vector<Transition>& out) {
            // Cartesian product of the per-sub-state supports.
            out.push_back({0, 1.0});
            std::vector<Transition> grown;
            for (std::size_t i = 0; i < d_; ++i) {
                const auto r = row(h, i, substate_value(s, i, dims), a);
                grown.clear();
                for (const auto& partial : out)
                    for (SubValue v = 0; v < alphabet_; ++v)
                        if (r[v] != 0.0)
                            grown.push_back({partial.next + v * place[i], partial.prob * r[v]});
                out.swap(grown);
            }
        });
}

std::size_t EnvModel::query_count() const {
    // binomial(d, d_query)
    std::size_t n = 1;
    for (std::size_t k = 1; k <= dims.d_query; ++k) n = n * (dims.d - dims.d_query + k) / k;
    return n;
}

double EnvModel::emission(std::size_t step, std::size_t query_id, std::size_t o,
                          std::size_t u) const {
    const std::size_t U = dims.unqueried_count();
    return emissions[(((step - 1) * query_count() + query_id) * observations + o) * U + u];
}

double& EnvModel::emission_ref(std::size_t step, std::size_t query_id, std::size_t o,
                               std::size_t u) {
    const std::size_t U = dims.unqueried_count();
    return emissions[(((step - 1) * query_count() + query_id) * observations + o) * U + u];
}

void EnvModel::allocate_emissions(std::size_t n_observations) {
    if (n_observations == 0) throw ParameterError("emission tables need at least one observation");
    observations = n_observations;
    emissions.assign(dims.horizon * query_count() * observations * dims.unqueried_count(), 0.0);
}

EnvModel make_blank_model(std::string name, const Dims& dims, ClassTag tag) {
    dims.validate();
    const std::size_t S = dims.state_count();
    if (S > kMaxDenseStates)
        throw SizeError("state space of " + std::to_string(S) + " states exceeds dense limit");
    EnvModel m;
    m.name = std::move(name);
    m.dims = dims;
    m.tag = tag;
    m.initial.assign(S, 0.0);
    m.rewards.assign(dims.horizon * S * dims.actions, 0.0);
    return m;
}

namespace {

bool near_one(double x) { return std::fabs(x - 1.0) <= kNormTolerance; }

bool is_prob(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0 + kNormTolerance; }

[[noreturn]] void fail(const EnvModel& m, const std::string& what) {
    throw ModelError("model '" + m.name + "': " + what);
}

} // namespace

void validate_model(const EnvModel& m) {
    m.dims.validate();
    const Dims& dims = m.dims;
    const std::size_t S = dims.state_count();
    const std::size_t A = dims.actions;
    const std::size_t H = dims.horizon;

    if (m.initial.size() != S) fail(m, "initial distribution has wrong length");
    double total = 0.0;
    for (double p : m.initial) {
        if (!is_prob(p)) fail(m, "initial distribution has an invalid entry");
        total += p;
    }
    if (!near_one(total)) fail(m, "initial distribution does not sum to 1");

    if (m.transitions.steps() != H - 1 || (H > 1 && (m.transitions.states() != S ||
                                                     m.transitions.actions() != A)))
        fail(m, "transition table has wrong shape");
    for (std::size_t h = 1; h < H; ++h)
        for (std::size_t s = 0; s < S; ++s)
            for (std::size_t a = 0; a < A; ++a) {
                double row_sum = 0.0;
                for (const auto& e : m.next(h, s, a)) {
                    if (e.next >= S || !is_prob(e.prob))
                        fail(m, "transition row has an invalid entry");
                    row_sum += e.prob;
                }
                if (!near_one(row_sum))
                    fail(m, "transition row h=" + std::to_string(h) + " s=" + std::to_string(s) +
                                " a=" + std::to_string(a) + " does not sum to 1");
            }

    if (m.product) {
        const auto& pk = *m.product;
        if (pk.steps() != H - 1 || pk.d() != dims.d || pk.alphabet() != dims.alphabet ||
            pk.actions() != A)
            fail(m, "product kernel has wrong shape");
        for (std::size_t h = 1; h < H; ++h)
            for (std::size_t i = 0; i < dims.d; ++i)
                for (SubValue v = 0; v < dims.alphabet; ++v)
                    for (std::size_t a = 0; a < A; ++a) {
                        double row_sum = 0.0;
                        for (double p : pk.row(h, i, v, a)) {
                            if (!is_prob(p)) fail(m, "product kernel has an invalid entry");
                            row_sum += p;
                        }
                        if (!near_one(row_sum)) fail(m, "product kernel row does not sum to 1");
                    }
    }

    if (m.rewards.size() != H * S * A) fail(m, "reward table has wrong length");
    for (double r : m.rewards)
        if (!(r >= 0.0 && r <= 1.0)) fail(m, "reward mean outside [0,1]");

    if (m.tag == ClassTag::Class1 && !m.product) fail(m, "class1 model needs product-form transitions");
    if (m.tag == ClassTag::Class2 && !m.has_emissions()) fail(m, "class2 model needs emissions");
    if (m.tag != ClassTag::Class2 && m.has_emissions())
        fail(m, "emissions are only allowed on class2 models");

    if (m.has_emissions()) {
        const std::size_t U = dims.unqueried_count();
        const std::size_t Q = m.query_count();
        if (m.observations == 0 || m.emissions.size() != H * Q * m.observations * U)
            fail(m, "emission table has wrong length");
        for (std::size_t h = 1; h <= H; ++h)
            for (std::size_t q = 0; q < Q; ++q)
                for (std::size_t u = 0; u < U; ++u) {
                    double col = 0.0;
                    for (std::size_t o = 0; o < m.observations; ++o) {
                        const double p = m.emission(h, q, o, u);
                        if (!is_prob(p)) fail(m, "emission has an invalid entry");
                        col += p;
                    }
                    if (!near_one(col))
                        fail(m, "emission column h=" + std::to_string(h) + " q=" +
                                    std::to_string(q) + " u=" + std::to_string(u) +
                                    " does not sum to 1");
                }
    }
}

} // namespace hsilab::envs
