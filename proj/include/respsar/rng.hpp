#pragma once

#include <cstdint>

#include "respsar/common.hpp"

namespace respsar {

/// splitmix64 mixing step. Statistically solid for seed derivation and
/// counter-based streams; identical output on every platform.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Derive an independent stream seed from a base seed and a counter.
/// Used so per-sample noise draws do not depend on evaluation order.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t counter) {
    std::uint64_t s = base ^ (0xD1B54A32D192ED03ULL * (counter + 1));
    splitmix64(s);
    return s;
}

/// Counter-based generator: a fixed (seed, counter) pair always yields the
/// same draws regardless of thread count or call order elsewhere.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : state_(seed) { splitmix64(state_); }
    CounterRng(std::uint64_t base, std::uint64_t counter) : state_(derive_seed(base, counter)) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    /// Uniform double in (0, 1] (never 0, safe for log()).
    double next_unit() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * (1.0 / 9007199254740992.0);
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    /// Standard normal via Box-Muller.
    double normal() {
        const double u1 = next_unit();
        const double u2 = next_unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    /// Circular complex normal with E|z|^2 = sigma^2.
    cplx complex_normal(double sigma) {
        const double u1 = next_unit();
        const double u2 = next_unit();
        const double r = sigma * std::sqrt(-std::log(u1));
        return {r * std::cos(2.0 * kPi * u2), r * std::sin(2.0 * kPi * u2)};
    }

private:
    std::uint64_t state_;
};

} // namespace respsar
