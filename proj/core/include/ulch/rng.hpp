#pragma once

#include <cstdint>
#include <random>

namespace ulch {

// All randomness flows from explicit 64-bit seeds. std::mt19937_64 has a
// standard-specified sequence and the bit mapping below avoids the
// implementation-defined std::uniform_real_distribution, so streams are
// reproducible across compilers.
inline double unit_double(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * (1.0 / 9007199254740992.0);  // [0,1)
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    std::uint64_t bits() { return eng_(); }
    double uniform() { return unit_double(eng_()); }          // [0, 1)
    double symmetric(double amplitude) { return amplitude * (2.0 * uniform() - 1.0); }

  private:
    std::mt19937_64 eng_;
};

// Derive independent sub-seeds from a master seed (splitmix64 step).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace ulch
