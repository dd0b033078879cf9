#pragma once

#include <cstdint>

#include "randtr/vector.hpp"

namespace randtr {

/// Counter-based 64-bit generator.
///
/// Output i of stream (seed, stream) is mix64(key + (i + 1) * golden) with
/// key = mix64(seed ^ mix64(stream + golden)); this is SplitMix64 with an
/// explicit counter, so draws are identical on every platform and a
/// generator can be copied, compared and fast-forwarded. Each solver run owns
/// exactly one stream; the harness derives independent streams by giving each
/// purpose its own `stream` id.
class CounterRng {
 public:
  CounterRng() : CounterRng(0, 0) {}
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller; consumes two raw draws per pair.
  double normal() noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

  friend bool operator==(const CounterRng&, const CounterRng&) = default;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t mix64(std::uint64_t z) noexcept;

/// Uniform sample on the unit sphere of R^d (normalized Gaussian vector).
DenseVector sample_unit_sphere(std::size_t d, CounterRng& rng);

/// Vector of i.i.d. standard normals.
DenseVector sample_gaussian(std::size_t d, CounterRng& rng);

}  // namespace randtr
