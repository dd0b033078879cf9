#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "randtr/oracle.hpp"
#include "randtr/vector.hpp"

namespace randtr {

/// m(v) = <g, v> + 1/2 <v, H v>, with H available only through `hvp`.
struct QuadraticModel {
  DenseVector g;
  LinearOperator hvp;

  std::size_t dim() const noexcept { return g.size(); }
  /// Evaluates m(v) directly (one application of H).
  double value(const DenseVector& v) const;
  /// r(v) = -(H v + g) = -grad m(v) (one application of H).
  DenseVector residual(const DenseVector& v) const;
};

enum class StopReason { RES, OOB };
std::string_view to_string(StopReason s) noexcept;

enum class TraceMode {
  Auto,  ///< record iterates only when d <= 10^4
  On,
  Off,
};

struct SubproblemOptions {
  double omega1 = 0.1;
  double omega2 = 1.0;
  /// 0 selects the default cap min(10 d, 10000).
  std::size_t max_inner = 0;
  TraceMode trace = TraceMode::Auto;
};

std::size_t default_max_inner(std::size_t d) noexcept;

/// Full record of one tCG / tCG-bg call.
///
/// For t in 0..T: iterates[t] = v^(t), residuals[t] = r^(t) (by recurrence).
/// For t in 1..T: directions[t-1] = p^(t-1), curvatures[t-1] = <p, Hp>,
/// alphas[t-1] = alpha^(t) (Inf when the curvature is exactly zero),
/// tentative[t-1] = v_+^(t-1). betas[t-1] = beta^(t) for the steps that
/// continued. On OOB the last iterate is the truncated point on the inner
/// sphere and `truncation_s` is the step taken along the last direction.
struct SubproblemTrace {
  std::vector<DenseVector> iterates;
  std::vector<DenseVector> residuals;
  std::vector<double> residual_norms;
  std::vector<DenseVector> directions;
  std::vector<DenseVector> tentative;
  std::vector<double> curvatures;
  std::vector<double> alphas;
  std::vector<double> betas;
  std::size_t t_in = 0;
  std::size_t hvp_count = 0;
  bool truncated = false;
  double truncation_s = 0.0;
};

struct BoundaryStepResult {
  DenseVector u;
  bool used_boundary = false;
  /// s' such that u = v + s' r.
  double s = 0.0;
  /// <r, H r>
  double curvature = 0.0;
  double residual_norm = 0.0;
  /// m(v) - m(u) computed along the line.
  double model_decrease = 0.0;
  std::size_t hvp_count = 0;
};

struct SubproblemResult {
  DenseVector step;
  StopReason stop_reason = StopReason::RES;
  /// Inner iterations T (boundary gradient steps excluded).
  std::size_t iterations = 0;
  /// HVPs spent inside the call (excludes a caller-supplied H xi).
  std::size_t hvp_count = 0;
  /// Hit max_inner before either stopping rule fired.
  bool truncated = false;
  /// m(xi) - m(u), accumulated exactly along the piecewise-linear path.
  double model_decrease = 0.0;
  /// m(xi)
  double model_start = 0.0;
  double r0_norm = 0.0;
  double final_residual_norm = 0.0;
  std::optional<BoundaryStepResult> boundary;
  std::optional<SubproblemTrace> trace;

  double model_at_step() const noexcept { return model_start - model_decrease; }
};

/// s >= 0 with ||v + s p|| = radius, assuming ||v|| <= radius; rounding
/// below zero is clamped.
double sphere_step(const DenseVector& v, const DenseVector& p, double radius);

/// Minimizes m along v + s r (s >= 0, r = -grad m(v)) inside the ball of
/// radius `delta`. Pass `residual` to reuse a known r; then exactly one HVP
/// (for H r) is spent. A zero residual returns u = v.
BoundaryStepResult boundary_gradient_step(const QuadraticModel& model, double delta,
                                          const DenseVector& v,
                                          const DenseVector* residual = nullptr);

/// Truncated CG with boundary gradient step started at xi (||xi|| <= delta/4).
/// CG runs inside the ball of radius delta/2; on nonpositive curvature or an
/// exit from that ball the iterate is truncated to the delta/2 sphere and a
/// boundary gradient step with radius delta produces the output (OOB).
/// `h_xi`, when given, must equal H xi and saves one HVP.
SubproblemResult tcg_bg(const QuadraticModel& model, double delta, const DenseVector& xi,
                        const SubproblemOptions& options = {},
                        const DenseVector* h_xi = nullptr);

/// Classical Steihaug-Toint tCG from zero with ball radius delta and no
/// extra gradient step.
SubproblemResult tcg_classic(const QuadraticModel& model, double delta,
                             const SubproblemOptions& options = {});

/// True iff the CG iterates on m started at xi equal xi plus the CG iterates
/// on the translated quadratic v -> m(xi + v) started at zero, for the first
/// `steps` iterations (entrywise, relative 1e-9 to the summand magnitudes).
/// Throws ArgumentError if either run leaves the CG phase before `steps`.
bool check_cg_shift_equivalence(const QuadraticModel& model, const DenseVector& xi,
                                std::size_t steps);

}  // namespace randtr
