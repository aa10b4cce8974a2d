#pragma once

#include <cstdint>
#include <random>

namespace flatlab {

// splitmix64 finalizer; good avalanche, used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x);

// Named deterministic RNG stream. Stream (seed, k) is decorrelated from
// (seed, j != k) by splitmix64 mixing, so trajectories, rejection blocks and
// search directions can each own an independent stream addressed by index.
// Gaussians use the Marsaglia polar method so the draw sequence does not
// depend on the standard library implementation.
class Rng {
  public:
    Rng(std::uint64_t seed, std::uint64_t stream);

    // uniform in [0, 1)
    double uniform();
    // uniform in [lo, hi)
    double uniform(double lo, double hi);
    // standard normal
    double gaussian();
    // uniform integer in [0, n)
    std::uint64_t uniform_index(std::uint64_t n);

  private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace flatlab
