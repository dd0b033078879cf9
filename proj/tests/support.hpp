#pragma once

// Small fixtures shared by the unit tests.

#include <cmath>
#include <vector>

#include "randtr/oracle.hpp"
#include "randtr/props.hpp"

namespace testsupport {

using randtr::DenseVector;
using randtr::props::Mat;
using randtr::props::Vec;

// f(x) = <b, x> + 1/2 x^T H x
inline randtr::ObjectiveOracle quadratic(const Mat& h, const Vec& b) {
  const std::size_t d = static_cast<std::size_t>(b.size());
  return randtr::ObjectiveOracle(
      d,
      [h, b](const DenseVector& x) {
        const Vec v = randtr::props::to_eigen(x);
        return b.dot(v) + 0.5 * v.dot(h * v);
      },
      [h, b](const DenseVector& x) {
        return randtr::props::from_eigen(h * randtr::props::to_eigen(x) + b);
      },
      [h](const DenseVector&, const DenseVector& u) {
        return randtr::props::from_eigen(h * randtr::props::to_eigen(u));
      });
}

inline Mat diag(std::initializer_list<double> e) {
  Vec v(static_cast<Eigen::Index>(e.size()));
  Eigen::Index i = 0;
  for (double x : e) v(i++) = x;
  return v.asDiagonal();
}

inline double max_abs_diff(const DenseVector& a, const DenseVector& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace testsupport
