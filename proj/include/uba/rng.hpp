#pragma once

#include <cmath>
#include <cstdint>

namespace uba {

// SplitMix64 engine. Used everywhere randomness must be reproducible: unlike
// the standard distributions, every draw here is bit-identical across
// platforms and library versions, which is what makes seeded runs replayable.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0,1) with 53 bits of precision.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform in [a,b).
  double uniform(double a, double b) { return a + (b - a) * next_double(); }

  // Uniform integer in [0,n). n must be >= 1.
  std::uint64_t uniform_index(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  // Standard normal via Box-Muller.
  double normal() {
    double u1 = next_double();
    double u2 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  double normal(double mu, double sigma) { return mu + sigma * normal(); }

  // Derives an independent sub-seed from a master seed and a stream id. The
  // scheme is a documented contract: stream k of seed s is always
  // splitmix(s ^ (k+1)*golden). Trees/runs keyed this way can be computed in
  // any order, or in parallel, with identical results.
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 g(seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1)));
    return g.next();
  }

 private:
  std::uint64_t state_;
};

}  // namespace uba
