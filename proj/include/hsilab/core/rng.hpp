#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace hsilab {

/// Named sub-streams. Environment randomness is split so that an agent's
/// choices never shift the draws used by other parts of the environment.
enum class Stream : std::uint64_t {
    Init = 1,
    Transition = 2,
    Reward = 3,
    Emission = 4,
    Agent = 5,
    Model = 6,
};

std::string_view stream_name(Stream s);

/// SplitMix64 finalizer; used for seed derivation.
std::uint64_t splitmix64(std::uint64_t x);

/// FNV-1a over a string, for mixing names into seeds.
std::uint64_t hash_string(std::string_view s);

/// Combines a seed with further values (order sensitive).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t value);

/// Deterministic random source for one (seed, stream) pair.
///
/// Draws are produced from std::mt19937_64 with hand-written transforms so that
/// identical (seed, stream, draw count) give identical values on every platform.
class SampleRng {
public:
    SampleRng(std::uint64_t seed, Stream stream);

    std::uint64_t seed() const noexcept { return seed_; }
    Stream stream() const noexcept { return stream_; }

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform in [0,1) with 53 random bits.
    double uniform();
    /// Uniform integer in [0, n). n must be positive.
    std::size_t uniform_index(std::size_t n);
    bool bernoulli(double p) { return uniform() < p; }
    /// Index drawn proportionally to non-negative weights (need not be normalized).
    std::size_t categorical(std::span<const double> weights);

private:
    std::uint64_t seed_;
    Stream stream_;
    std::mt19937_64 engine_;
};

} // namespace hsilab
