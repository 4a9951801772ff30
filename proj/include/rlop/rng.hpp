#pragma once

#include <cstdint>
#include <random>

namespace rlop {

// SplitMix64 mixing step. Used for seeding and for deriving independent
// child seeds; good avalanche behaviour even for adjacent inputs.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Seed-splitting function: child stream seed for worker/run `index` under
// `master`. This is the documented rule every parallel component uses, so a
// manifest containing (master, index) pins the entire stream.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(master ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

// Deterministic generator wrapper. All distributions are implemented here
// (not via std::*_distribution) so that sequences are identical across
// standard libraries and builds.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [lo, hi], both inclusive.
    int uniform_int(int lo, int hi) {
        const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
        const auto wide = static_cast<unsigned __int128>(next_u64()) * range;
        return lo + static_cast<int>(wide >> 64);
    }

private:
    std::mt19937_64 engine_;
};

} // namespace rlop
