#pragma once

#include <cstdint>
#include <cstddef>
#include <vector>

namespace weakpairs {

/// Deterministic xoshiro256** generator with explicit uniform/normal
/// transforms. The standard-library distributions are implementation
/// defined, so all sampling goes through this class to keep dataset bytes
/// identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);

  /// Standard normal via Box-Muller; caches the second deviate.
  double normal();

  double normal(double mean, double sd);

  /// Uniform index in [0, n). n must be positive.
  std::size_t index(std::size_t n);

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  /// Derives an independent child seed from a master seed and a stream
  /// index (splitmix64 of master advanced by index+1). This is the seed
  /// splitting rule used for per-seed/per-cell streams; documented in the
  /// README so runs can be reproduced externally.
  static std::uint64_t derive(std::uint64_t master, std::uint64_t index);

 private:
  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace weakpairs
