#pragma once

#include <cstdint>
#include <vector>

#include "rsco/core.hpp"

namespace rsco {

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t z) noexcept;

/// Derives an independent 64-bit key from a base seed and up to two indices
/// (cell/trial, sample index, ...). Order of the arguments matters.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) noexcept;

/// Counter-based generator: the i-th 64-bit output is mix64(key + (i+1)*golden),
/// i.e. SplitMix64 run in counter mode. Every stream is fully determined by its
/// key, so reproducibility does not depend on the standard library's
/// distribution implementations (all distributions below are written out).
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on (0, 1).
  double uniform_open() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Unbiased integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound) noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }
  /// Standard normal (Box-Muller, spare value cached).
  double normal() noexcept;
  Vector normal_vector(Eigen::Index d) noexcept;

  template <typename T>
  void shuffle(std::vector<T>& items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rsco
