#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "randtr/oracle.hpp"
#include "randtr/rng.hpp"
#include "randtr/subproblem.hpp"

namespace randtr {

enum class XiRule { THEORY, PRACTICAL };
enum class SolverKind { TCG_BG, TCG_CLASSIC };
enum class Termination { GRAD_TOL, MAX_OUTER };

std::string_view to_string(XiRule r) noexcept;
std::string_view to_string(SolverKind s) noexcept;
std::string_view to_string(Termination t) noexcept;

/// RNG stream used by the solver; problem generation and initial points use
/// other stream ids so they never share draws with a run.
inline constexpr std::uint64_t kSolverStream = 1;

struct TrustRegionConfig {
  double rho_prime = 0.1;
  double rho_double_prime = 0.75;
  double delta_bar = 10.0;
  double delta0 = 1.0;
  /// 0 selects the deterministic baseline (xi = 0).
  double sigma = 1e-6;
  double omega1 = 0.1;
  double omega2 = 1.0;
  XiRule xi_rule = XiRule::THEORY;
  /// The model uses H + hessian_shift * I.
  double hessian_shift = 0.0;
  std::size_t max_outer = 1000;
  double grad_tol = 0.0;
  std::uint64_t seed = 0;
  SolverKind solver = SolverKind::TCG_BG;
  /// 0 selects default_max_inner(d).
  std::size_t max_inner = 0;
  /// Trace retention for the inner solver (visible to observers only).
  TraceMode subproblem_trace = TraceMode::Off;

  /// Throws ArgumentError on an inconsistent configuration.
  void validate() const;
};

struct TrustRegionState {
  DenseVector x;
  double delta = 0.0;
  std::size_t k = 0;
  CounterRng rng;
  double f_current = 0.0;
  DenseVector g_current;
};

/// Evaluates f and grad f at x0 (one call each) and seeds the solver stream.
TrustRegionState make_initial_state(ObjectiveOracle& oracle, const DenseVector& x0,
                                    const TrustRegionConfig& config);

struct IterationRecord {
  std::size_t k = 0;
  /// f(x_k), ||g_k|| and Delta_k before the step.
  double f_value = 0.0;
  double grad_norm = 0.0;
  double delta_before = 0.0;
  /// NaN when the denominator vanished and the step was declared unsuccessful.
  double rho = 0.0;
  double theta = 0.0;
  bool accepted = false;
  StopReason stop_reason = StopReason::RES;
  double delta_after = 0.0;
  std::size_t inner_iters = 0;
  std::uint64_t hvp_cum = 0;
  std::uint64_t f_cum = 0;
  std::uint64_t grad_cum = 0;
  double xi_norm = 0.0;
  double model_decrease = 0.0;
  double f_trial = 0.0;
  double step_norm = 0.0;
  double r0_norm = 0.0;
  bool inner_truncated = false;
  double wall_ms = 0.0;
};

struct Perturbation {
  DenseVector xi;
  /// (H + shift I) xi, reused by the inner solver and for theta.
  DenseVector h_xi;
  /// <h_xi, g> after the sign choice (>= 0).
  double curvature_alignment = 0.0;
};

/// Radius of xi for the given rule: THEORY min(sigma, delta/4), PRACTICAL
/// min(max(sigma, sqrt(eps)), delta/100).
double perturbation_radius(const TrustRegionConfig& config, double delta);

/// Draws xi uniformly on the sphere of radius perturbation_radius and flips
/// its sign so that <H xi, g> >= 0 (one HVP; a tie keeps the drawn sign).
Perturbation sample_perturbation(TrustRegionState& state, ObjectiveOracle& oracle,
                                 const TrustRegionConfig& config);

/// Everything an observer may inspect after one outer iteration. References
/// are valid only during the callback.
struct StepEvent {
  const TrustRegionState& before;
  const DenseVector& xi;
  const SubproblemResult& sub;
  const IterationRecord& record;
};
using StepObserver = std::function<void(const StepEvent&)>;

/// One outer iteration; updates `state` in place and returns its record.
IterationRecord tr_step(TrustRegionState& state, ObjectiveOracle& oracle,
                        const TrustRegionConfig& config, const StepObserver& observer = {});

struct RunReport {
  std::vector<IterationRecord> records;
  DenseVector x_final;
  std::uint64_t final_point_digest = 0;
  double final_f = 0.0;
  double final_grad_norm = 0.0;
  OracleCounters totals;
  double wall_time_ms = 0.0;
  Termination terminated_by = Termination::MAX_OUTER;
};

/// FNV-1a over the IEEE-754 bytes of the entries.
std::uint64_t point_digest(const DenseVector& x) noexcept;

/// Iterates tr_step until max_outer or until an accepted step lands on a
/// point with ||g|| <= grad_tol. Oracle faults are rethrown as RunFault with
/// the iteration index. Counters in the report are relative to the oracle's
/// counters at entry.
RunReport tr_run(ObjectiveOracle& oracle, const DenseVector& x0, const TrustRegionConfig& config,
                 const StepObserver& observer = {});

}  // namespace randtr
