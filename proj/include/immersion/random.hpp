#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace immersion {

/// Seeded generator owned by a single run. Each stochastic subsystem draws
/// from its own stream so that, e.g., freezing the tracker does not shift
/// the probe schedule of the same seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  Rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
  }

  /// Uniform on the open interval (0, 1).
  double uniform_open() {
    double u = 0.0;
    do {
      u = canonical();
    } while (u <= 0.0);
    return u;
  }

  double normal(double mean, double sd) { return std::normal_distribution<double>(mean, sd)(engine_); }

  std::uint64_t bits() { return engine_(); }

 private:
  // 53 random mantissa bits; fixed construction keeps sequences identical
  // across standard-library implementations.
  double canonical() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 engine_;
};

enum class Stream : std::uint64_t { memory_noise = 1, probes = 2, tracker = 3, course = 4, timing = 5 };

inline Rng make_stream(std::uint64_t seed, Stream s) { return Rng(seed, static_cast<std::uint64_t>(s)); }

}  // namespace immersion
