#include "randtr/vector.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace randtr {

namespace {

void check_finite(std::span<const double> v, const char* context) {
  bool bad = false;
  for (double e : v) bad |= !std::isfinite(e);
  if (bad) throw NumericalError(std::string(context) + ": non-finite entry");
}

}  // namespace

DenseVector::DenseVector(std::vector<double> values) : data_(std::move(values)) {
  check_finite(data_, "DenseVector");
}

DenseVector::DenseVector(std::initializer_list<double> values) : data_(values) {
  check_finite(data_, "DenseVector");
}

DenseVector DenseVector::constant(std::size_t n, double value) {
  return DenseVector(std::vector<double>(n, value));
}

DenseVector DenseVector::unit(std::size_t n, std::size_t i) {
  if (i >= n) throw ArgumentError("unit: index out of range");
  DenseVector e(n);
  e.data_[i] = 1.0;
  return e;
}

void DenseVector::require_finite(const char* context) const { check_finite(data_, context); }

void require_same_size(const DenseVector& a, const DenseVector& b, const char* op) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string(op) + ": length mismatch (" + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()) + ")");
  }
}

double dot(const DenseVector& a, const DenseVector& b) {
  require_same_size(a, b, "dot");
  const double* pa = a.values().data();
  const double* pb = b.values().data();
  double s = 0.0;
  for (std::size_t i = 0, n = a.size(); i < n; ++i) s += pa[i] * pb[i];
  if (!std::isfinite(s)) throw NumericalError("dot: non-finite result");
  return s;
}

double norm(const DenseVector& a) { return std::sqrt(dot(a, a)); }

double norm_inf(const DenseVector& a) {
  double m = 0.0;
  for (double e : a) m = std::max(m, std::abs(e));
  return m;
}

DenseVector axpy(double alpha, const DenseVector& x, const DenseVector& y) {
  DenseVector out = y;
  axpy_inplace(alpha, x, out);
  return out;
}

void axpy_inplace(double alpha, const DenseVector& x, DenseVector& y) {
  require_same_size(x, y, "axpy");
  const double* px = x.values().data();
  double* py = y.values().data();
  bool bad = !std::isfinite(alpha);
  for (std::size_t i = 0, n = x.size(); i < n; ++i) {
    py[i] += alpha * px[i];
    bad |= !std::isfinite(py[i]);
  }
  if (bad) throw NumericalError("axpy: non-finite result");
}

void scale_add_inplace(double alpha, DenseVector& x, const DenseVector& y) {
  require_same_size(x, y, "scale_add");
  double* px = x.values().data();
  const double* py = y.values().data();
  bool bad = !std::isfinite(alpha);
  for (std::size_t i = 0, n = x.size(); i < n; ++i) {
    px[i] = alpha * px[i] + py[i];
    bad |= !std::isfinite(px[i]);
  }
  if (bad) throw NumericalError("scale_add: non-finite result");
}

DenseVector scaled(double alpha, const DenseVector& x) {
  DenseVector out(x.size());
  axpy_inplace(alpha, x, out);
  return out;
}

DenseVector operator+(const DenseVector& a, const DenseVector& b) { return axpy(1.0, a, b); }

DenseVector operator-(const DenseVector& a, const DenseVector& b) { return axpy(-1.0, b, a); }

DenseVector operator-(const DenseVector& a) { return scaled(-1.0, a); }

}  // namespace randtr
