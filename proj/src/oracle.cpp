#include "randtr/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace randtr {

namespace {

constexpr double kTiny = 1e-300;

void require_finite_output(const DenseVector& v, std::size_t dim, const char* what) {
  if (v.size() != dim) {
    throw OracleFault(std::string(what) + " returned length " + std::to_string(v.size()) +
                      ", expected " + std::to_string(dim));
  }
  for (double e : v) {
    if (!std::isfinite(e)) throw OracleFault(std::string(what) + " returned a non-finite entry");
  }
}

}  // namespace

DenseVector HessianAt::apply(const DenseVector& u) const { return owner_->checked_hvp(op_, u); }

ObjectiveOracle::ObjectiveOracle(std::size_t dim, ValueFn value, GradFn grad, HvpFn hvp)
    : ObjectiveOracle(dim, std::move(value), std::move(grad),
                      LinearizeFn([hvp = std::move(hvp)](const DenseVector& x) -> LinearOperator {
                        return [hvp, x](const DenseVector& u) { return hvp(x, u); };
                      })) {}

ObjectiveOracle::ObjectiveOracle(std::size_t dim, ValueFn value, GradFn grad,
                                 LinearizeFn linearize)
    : dim_(dim),
      fns_(std::make_shared<const Functions>(
          Functions{std::move(value), std::move(grad), std::move(linearize)})) {
  if (dim == 0) throw ArgumentError("ObjectiveOracle: dimension must be positive");
}

void ObjectiveOracle::check_point(const DenseVector& x, const char* what) const {
  if (x.size() != dim_) {
    throw DimensionError(std::string(what) + ": point has length " + std::to_string(x.size()) +
                         ", oracle dimension is " + std::to_string(dim_));
  }
}

double ObjectiveOracle::value(const DenseVector& x) {
  check_point(x, "value");
  ++counters_.n_f;
  const double v = fns_->value(x);
  if (!std::isfinite(v)) throw OracleFault("value returned a non-finite number");
  return v;
}

DenseVector ObjectiveOracle::gradient(const DenseVector& x) {
  check_point(x, "gradient");
  ++counters_.n_grad;
  DenseVector g = fns_->grad(x);
  require_finite_output(g, dim_, "gradient");
  return g;
}

DenseVector ObjectiveOracle::checked_hvp(const LinearOperator& op, const DenseVector& u) {
  check_point(u, "hvp direction");
  ++counters_.n_hvp;
  DenseVector hu = op(u);
  require_finite_output(hu, dim_, "hvp");
  return hu;
}

DenseVector ObjectiveOracle::hvp(const DenseVector& x, const DenseVector& u) {
  check_point(x, "hvp");
  return checked_hvp(fns_->linearize(x), u);
}

HessianAt ObjectiveOracle::hessian_at(const DenseVector& x) {
  check_point(x, "hessian_at");
  return HessianAt(*this, fns_->linearize(x));
}

void ProblemConstants::validate() const {
  if (mu && L_G && !(*mu > 0.0 && *mu <= *L_G)) {
    throw ArgumentError("ProblemConstants: require 0 < mu <= L_G");
  }
}

ValidationReport validate_oracle(ObjectiveOracle& oracle, const DenseVector& point,
                                 std::size_t n_probes, double step, CounterRng& rng) {
  if (!(step > 0.0)) throw ArgumentError("validate_oracle: step must be positive");
  if (n_probes < 1) throw ArgumentError("validate_oracle: n_probes must be >= 1");
  if (point.size() != oracle.dim()) throw DimensionError("validate_oracle: point length");

  ValidationReport report;
  report.n_probes = n_probes;
  report.step = step;

  const DenseVector g = oracle.gradient(point);
  const double g_norm = norm(g);
  const HessianAt hess = oracle.hessian_at(point);

  for (std::size_t probe = 0; probe < n_probes; ++probe) {
    const DenseVector u = sample_unit_sphere(point.size(), rng);
    const DenseVector xp = axpy(step, u, point);
    const DenseVector xm = axpy(-step, u, point);

    const double fd_dir = (oracle.value(xp) - oracle.value(xm)) / (2.0 * step);
    const double exact_dir = dot(g, u);
    report.max_grad_rel_err = std::max(report.max_grad_rel_err,
                                       std::abs(fd_dir - exact_dir) / std::max(g_norm, kTiny));

    DenseVector fd_h = oracle.gradient(xp) - oracle.gradient(xm);
    for (double& e : fd_h.values()) e /= 2.0 * step;
    const DenseVector hu = hess.apply(u);
    const double scale = std::max({norm(hu), norm(fd_h), kTiny});
    report.max_hvp_rel_err = std::max(report.max_hvp_rel_err, norm(fd_h - hu) / scale);
  }
  return report;
}

ValidationReport validate_oracle(ObjectiveOracle& oracle, const DenseVector& point,
                                 std::size_t n_probes, double step, std::uint64_t seed) {
  CounterRng rng(seed, 0x76616c6964ULL);
  return validate_oracle(oracle, point, n_probes, step, rng);
}

}  // namespace randtr
