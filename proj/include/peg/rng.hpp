#pragma once

#include <cstdint>
#include <random>

namespace peg {

// Deterministic RNG. mt19937_64 output is fixed by the standard; the
// uniform helpers below avoid std distributions, whose sequences are
// implementation-defined, so seeded runs reproduce across toolchains.
class Rng {
  public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next() { return eng_(); }

    // [0, 1)
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // [0, n)
    uint64_t uniform_int(uint64_t n) {
        if (n == 0)
            return 0;
        uint64_t bound = n * ((~uint64_t{0}) / n);
        uint64_t x;
        do {
            x = eng_();
        } while (x >= bound);
        return x % n;
    }

    bool chance(double p) { return uniform() < p; }

  private:
    std::mt19937_64 eng_;
};

}  // namespace peg
