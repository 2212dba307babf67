#pragma once

#include <cstdint>
#include <random>

namespace hexid {

/// Seedable generator used for every random draw in the library.
///
/// Engine: std::mt19937_64 (a twisted generalized feedback shift register,
/// fully specified by the C++ standard). Uniform doubles take the top 53 bits
/// of one engine output; Gaussian draws use the Box-Muller transform and
/// cache the second variate. Neither depends on the standard library's
/// implementation-defined distributions, so sequences are reproducible
/// across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform();

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double standard_normal();

  double normal(double mean, double stddev) {
    return mean + stddev * standard_normal();
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finalizer applied to (master, index): per-run and per-layer
/// seeds are derived with this so that neighbouring indices give unrelated
/// streams.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace hexid
