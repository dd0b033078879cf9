#include "randtr/rng.hpp"

#include <cmath>
#include <numbers>

namespace randtr {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(seed ^ mix64(stream + kGolden))) {}

std::uint64_t CounterRng::next_u64() noexcept {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double CounterRng::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // u1 in (0, 1] keeps the log finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

DenseVector sample_gaussian(std::size_t d, CounterRng& rng) {
  DenseVector v(d);
  for (std::size_t i = 0; i < d; ++i) v[i] = rng.normal();
  return v;
}

DenseVector sample_unit_sphere(std::size_t d, CounterRng& rng) {
  for (;;) {
    DenseVector v = sample_gaussian(d, rng);
    const double n = norm(v);
    if (n > 0.0) {
      for (double& e : v.values()) e /= n;
      return v;
    }
  }
}

}  // namespace randtr
