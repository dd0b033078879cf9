#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>

#include "randtr/rng.hpp"
#include "randtr/vector.hpp"

namespace randtr {

struct OracleCounters {
  std::uint64_t n_f = 0;
  std::uint64_t n_grad = 0;
  std::uint64_t n_hvp = 0;

  friend bool operator==(const OracleCounters&, const OracleCounters&) = default;
};

/// Linear map u -> H u at a fixed point.
using LinearOperator = std::function<DenseVector(const DenseVector&)>;

class ObjectiveOracle;

/// The Hessian of an oracle linearized at one point. Every apply() is one
/// counted Hessian-vector product on the owning oracle, which must outlive
/// this object.
class HessianAt {
 public:
  HessianAt(ObjectiveOracle& owner, LinearOperator op) : owner_(&owner), op_(std::move(op)) {}
  DenseVector apply(const DenseVector& u) const;
  DenseVector operator()(const DenseVector& u) const { return apply(u); }

 private:
  ObjectiveOracle* owner_;
  LinearOperator op_;
};

/// Matrix-free access to f, grad f and Hessian-vector products.
///
/// The callables are shared and immutable; counters belong to the oracle
/// instance, so copying an oracle gives an independent call ledger over the
/// same function. One instance should be driven by one thread at a time.
class ObjectiveOracle {
 public:
  using ValueFn = std::function<double(const DenseVector&)>;
  using GradFn = std::function<DenseVector(const DenseVector&)>;
  using HvpFn = std::function<DenseVector(const DenseVector&, const DenseVector&)>;
  /// Builds the Hessian operator at x once so per-point work is amortized.
  using LinearizeFn = std::function<LinearOperator(const DenseVector&)>;

  ObjectiveOracle(std::size_t dim, ValueFn value, GradFn grad, HvpFn hvp);
  ObjectiveOracle(std::size_t dim, ValueFn value, GradFn grad, LinearizeFn linearize);

  std::size_t dim() const noexcept { return dim_; }

  double value(const DenseVector& x);
  DenseVector gradient(const DenseVector& x);
  DenseVector hvp(const DenseVector& x, const DenseVector& u);
  /// Hessian at x; creating it is free, each apply() counts one HVP.
  HessianAt hessian_at(const DenseVector& x);

  const OracleCounters& counters() const noexcept { return counters_; }
  void reset_counters() noexcept { counters_ = {}; }

 private:
  friend class HessianAt;
  DenseVector checked_hvp(const LinearOperator& op, const DenseVector& u);
  void check_point(const DenseVector& x, const char* what) const;

  struct Functions {
    ValueFn value;
    GradFn grad;
    LinearizeFn linearize;
  };
  std::size_t dim_;
  std::shared_ptr<const Functions> fns_;
  OracleCounters counters_;
};

/// Problem constants from the smoothness and landscape assumptions; any may be unknown.
struct ProblemConstants {
  std::optional<double> f_low;
  std::optional<double> L_G;
  std::optional<double> L_H;
  std::optional<double> mu;
  std::optional<double> gamma_s;
  std::optional<double> R_s;

  /// Throws ArgumentError when mu and L_G are both present but 0 < mu <= L_G fails.
  void validate() const;
};

struct ValidationReport {
  std::size_t n_probes = 0;
  double step = 0.0;
  /// max over probes of |fd - <g,u>| / max(||g||, tiny)
  double max_grad_rel_err = 0.0;
  /// max over probes of ||fd - Hu|| / max(||Hu||, ||fd||, tiny)
  double max_hvp_rel_err = 0.0;
};

/// Central finite-difference check of the gradient and HVP along random unit
/// directions drawn from `rng`. Oracle calls are counted on `oracle`.
ValidationReport validate_oracle(ObjectiveOracle& oracle, const DenseVector& point,
                                 std::size_t n_probes, double step, CounterRng& rng);

ValidationReport validate_oracle(ObjectiveOracle& oracle, const DenseVector& point,
                                 std::size_t n_probes = 5, double step = 1e-5,
                                 std::uint64_t seed = 0);

}  // namespace randtr
