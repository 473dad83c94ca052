#pragma once

#include <cstdint>

namespace pdsde {

// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t rotl64(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
}

/// Derives the seed of substream `stream_id` from `master_seed`.
///
/// The mix is `mix64((master ^ rotl(stream_id, 32)) + golden)`. For a fixed
/// master the map is injective in `stream_id`, so consecutive ids never
/// collide. The result only depends on 64-bit integer arithmetic and is
/// identical on every platform.
constexpr std::uint64_t seed_derive(std::uint64_t master_seed, std::uint64_t stream_id) noexcept {
    return mix64((master_seed ^ rotl64(stream_id, 32)) + 0x9E3779B97F4A7C15ULL);
}

/// xoshiro256** stream with portable uniform and normal variates.
///
/// Standard-library distributions are implementation defined, so the
/// transforms are written out here to keep results bitwise reproducible
/// across toolchains.
class Stream {
public:
    explicit Stream(std::uint64_t seed) noexcept;

    std::uint64_t next() noexcept;
    // Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    // Standard normal (Marsaglia polar method, spare value cached).
    double normal() noexcept;

private:
    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace pdsde
