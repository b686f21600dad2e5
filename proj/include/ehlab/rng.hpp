#pragma once

#include <cstdint>

namespace ehlab {

// splitmix64: tiny, fast, and fully specified, so streams are identical on
// every platform (std:: distributions are not).
struct Rng {
    std::uint64_t state;

    explicit Rng(std::uint64_t seed) : state(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }
};

// Deterministic per-trial stream: hash the master seed with the trial index
// so trials are independent of evaluation order and thread count.
inline Rng trial_rng(std::uint64_t master_seed, std::uint64_t trial_index) {
    Rng mix(master_seed ^ (0x6a09e667f3bcc909ull + trial_index * 0x9e3779b97f4a7c15ull));
    mix.next_u64();
    return Rng(mix.next_u64());
}

} // namespace ehlab
