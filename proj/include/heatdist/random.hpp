#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

#include "heatdist/error.hpp"

namespace heatdist {

/// Seeded random stream with platform-independent output.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The standard distributions are implementation-defined, so the
/// conversions to doubles and bounded integers are done here by hand.
/// Substreams are keyed by (seed, index) through SplitMix64 so that parallel
/// workers draw reproducible streams regardless of scheduling.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(mix(seed)) {}

    /// Independent stream number `index` derived from `seed`.
    static Rng substream(std::uint64_t seed, std::uint64_t index) {
        return Rng(mix(seed) ^ mix(index + 0x632be59bd9b4e019ULL));
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1), 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on [lo, hi]; returns lo exactly when lo == hi.
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n), unbiased via rejection.
    std::size_t index(std::size_t n) {
        if (n == 0) throw InvalidArgument("Rng::index: empty range");
        const std::uint64_t bound = n;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return static_cast<std::size_t>(x % bound);
    }

    bool bernoulli(double p) { return uniform01() < p; }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::mt19937_64 engine_;
};

}  // namespace heatdist
