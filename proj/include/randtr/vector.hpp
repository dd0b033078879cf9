#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "randtr/errors.hpp"

namespace randtr {

/// A point or direction in R^d stored as 64-bit floats.
///
/// Construction from external data rejects NaN/Inf; every arithmetic helper
/// below re-checks its result, so a DenseVector produced by the library is
/// always finite. Length is fixed at construction.
class DenseVector {
 public:
  DenseVector() = default;

  /// Zero vector of length n.
  explicit DenseVector(std::size_t n) : data_(n, 0.0) {}

  /// Takes ownership of `values`; throws NumericalError on non-finite input.
  explicit DenseVector(std::vector<double> values);

  DenseVector(std::initializer_list<double> values);

  static DenseVector constant(std::size_t n, double value);
  /// Standard basis vector e_i of length n.
  static DenseVector unit(std::size_t n, std::size_t i);

  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double operator[](std::size_t i) const noexcept { return data_[i]; }
  double& operator[](std::size_t i) noexcept { return data_[i]; }

  std::span<const double> values() const noexcept { return data_; }
  std::span<double> values() noexcept { return data_; }
  const std::vector<double>& raw() const noexcept { return data_; }

  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  /// Throws NumericalError if any entry is NaN/Inf (use after raw writes).
  void require_finite(const char* context) const;

  friend bool operator==(const DenseVector&, const DenseVector&) = default;

 private:
  std::vector<double> data_;
};

void require_same_size(const DenseVector& a, const DenseVector& b, const char* op);

double dot(const DenseVector& a, const DenseVector& b);
double norm(const DenseVector& a);
double norm_inf(const DenseVector& a);

/// alpha * x + y.
DenseVector axpy(double alpha, const DenseVector& x, const DenseVector& y);
/// y <- alpha * x + y.
void axpy_inplace(double alpha, const DenseVector& x, DenseVector& y);
/// x <- alpha * x + y  (the "xpay" update used for CG directions).
void scale_add_inplace(double alpha, DenseVector& x, const DenseVector& y);

DenseVector scaled(double alpha, const DenseVector& x);
DenseVector operator+(const DenseVector& a, const DenseVector& b);
DenseVector operator-(const DenseVector& a, const DenseVector& b);
DenseVector operator-(const DenseVector& a);

}  // namespace randtr
