#pragma once

#include <cstdint>

namespace shoalsim {

// All randomness in the project flows through splitmix64 so that runs are
// reproducible bit for bit on any platform. Standard-library engines are
// portable but the distributions are not, so we map raw 64-bit words to
// doubles and ranges ourselves. The exact construction is documented in the
// README ("Determinism").

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Stateless mix of independent key words into one 64-bit value.
inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0) {
    std::uint64_t s = a;
    std::uint64_t r = splitmix64(s);
    s ^= b + 0x9E3779B97F4A7C15ull + (r << 6) + (r >> 2);
    r = splitmix64(s);
    s ^= c + 0x9E3779B97F4A7C15ull + (r << 6) + (r >> 2);
    return splitmix64(s);
}

// Top 53 bits of a word, scaled into [0, 1). Exact IEEE-754 double.
inline double unit_double(std::uint64_t word) {
    return static_cast<double>(word >> 11) * 0x1.0p-53;
}

// Sequential stream used by the simulator for jitter draws.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    double next_unit() { return unit_double(next_u64()); }

    // Uniform in [lo, hi].
    double next_range(double lo, double hi) {
        return lo + (hi - lo) * next_unit();
    }

  private:
    std::uint64_t state_;
};

}  // namespace shoalsim
