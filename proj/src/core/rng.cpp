#include "hsilab/core/rng.hpp"

#include "hsilab/core/errors.hpp"

namespace hsilab {

std::string_view stream_name(Stream s) {
    switch (s) {
    case Stream::Init: return "init";
    case Stream::Transition: return "transition";
    case Stream::Reward: return "reward";
    case Stream::Emission: return "emission";
    case Stream::Agent: return "agent";
    case Stream::Model: return "model";
    }
    return "unknown";
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t hash_string(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t value) {
    return splitmix64(seed ^ splitmix64(value + 0x632be59bd9b4e019ULL));
}

SampleRng::SampleRng(std::uint64_t seed, Stream stream)
    : seed_(seed), stream_(stream),
      engine_(mix_seed(seed, static_cast<std::uint64_t>(stream))) {}

double SampleRng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t SampleRng::uniform_index(std::size_t n) {
    if (n == 0) throw ParameterError("uniform_index needs a positive bound");
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    // rejection sampling keeps the draw exactly uniform
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
}

std::size_t SampleRng::categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw ParameterError("categorical weights must have positive mass");
    const double u = uniform() * total;
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        if (weights[k] <= 0.0) continue;
        acc += weights[k];
        last_positive = k;
        if (u < acc) return k;
    }
    return last_positive;
}

} // namespace hsilab
