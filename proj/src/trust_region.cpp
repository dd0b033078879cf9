#include "randtr/trust_region.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

namespace randtr {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

LinearOperator shifted(HessianAt hess, double shift) {
  if (shift == 0.0) return [hess](const DenseVector& u) { return hess(u); };
  return [hess, shift](const DenseVector& u) { return axpy(shift, u, hess(u)); };
}

Perturbation draw(TrustRegionState& state, const LinearOperator& h,
                  const TrustRegionConfig& config) {
  const std::size_t d = state.x.size();
  Perturbation out;
  out.xi = scaled(perturbation_radius(config, state.delta), sample_unit_sphere(d, state.rng));
  out.h_xi = h(out.xi);
  out.curvature_alignment = dot(out.h_xi, state.g_current);
  if (out.curvature_alignment < 0.0) {
    out.xi = -out.xi;
    out.h_xi = -out.h_xi;
    out.curvature_alignment = -out.curvature_alignment;
  }
  return out;
}

OracleCounters minus(const OracleCounters& a, const OracleCounters& b) {
  return {a.n_f - b.n_f, a.n_grad - b.n_grad, a.n_hvp - b.n_hvp};
}

}  // namespace

std::string_view to_string(XiRule r) noexcept {
  return r == XiRule::THEORY ? "THEORY" : "PRACTICAL";
}

std::string_view to_string(SolverKind s) noexcept {
  return s == SolverKind::TCG_BG ? "TCG_BG" : "TCG_CLASSIC";
}

std::string_view to_string(Termination t) noexcept {
  return t == Termination::GRAD_TOL ? "GRAD_TOL" : "MAX_OUTER";
}

void TrustRegionConfig::validate() const {
  if (!(rho_prime > 0.0 && rho_prime < 1.0)) throw ArgumentError("rho_prime must be in (0,1)");
  if (!(rho_double_prime > rho_prime && rho_double_prime < 1.0)) {
    throw ArgumentError("rho_double_prime must be in (rho_prime,1)");
  }
  if (!(delta_bar > 0.0) || !std::isfinite(delta_bar)) {
    throw ArgumentError("delta_bar must be positive");
  }
  if (!(delta0 > 0.0 && delta0 <= delta_bar)) throw ArgumentError("delta0 must be in (0, delta_bar]");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ArgumentError("sigma must be >= 0");
  if (!(omega1 > 0.0 && omega1 < 1.0)) throw ArgumentError("omega1 must be in (0,1)");
  if (!(omega2 > 0.0) || !std::isfinite(omega2)) throw ArgumentError("omega2 must be positive");
  if (!(hessian_shift >= 0.0) || !std::isfinite(hessian_shift)) {
    throw ArgumentError("hessian_shift must be >= 0");
  }
  if (!(grad_tol >= 0.0)) throw ArgumentError("grad_tol must be >= 0");
  if (max_outer < 1) throw ArgumentError("max_outer must be >= 1");
  if (solver == SolverKind::TCG_CLASSIC && sigma > 0.0) {
    throw ArgumentError("TCG_CLASSIC starts from zero; use sigma = 0");
  }
  if (solver == SolverKind::TCG_BG && xi_rule == XiRule::THEORY && 4.0 * sigma > delta0) {
    throw ArgumentError("THEORY rule requires 4*sigma <= delta0");
  }
}

TrustRegionState make_initial_state(ObjectiveOracle& oracle, const DenseVector& x0,
                                    const TrustRegionConfig& config) {
  config.validate();
  if (x0.size() != oracle.dim()) throw DimensionError("tr: x0 length differs from oracle dim");
  x0.require_finite("tr: x0");
  TrustRegionState s;
  s.x = x0;
  s.delta = config.delta0;
  s.rng = CounterRng(config.seed, kSolverStream);
  s.f_current = oracle.value(x0);
  s.g_current = oracle.gradient(x0);
  return s;
}

double perturbation_radius(const TrustRegionConfig& config, double delta) {
  if (config.xi_rule == XiRule::THEORY) return std::min(config.sigma, delta / 4.0);
  const double floor = std::sqrt(std::numeric_limits<double>::epsilon());
  return std::min(std::max(config.sigma, floor), delta / 100.0);
}

Perturbation sample_perturbation(TrustRegionState& state, ObjectiveOracle& oracle,
                                 const TrustRegionConfig& config) {
  if (!(config.sigma > 0.0)) throw ArgumentError("sample_perturbation: sigma must be positive");
  return draw(state, shifted(oracle.hessian_at(state.x), config.hessian_shift), config);
}

IterationRecord tr_step(TrustRegionState& state, ObjectiveOracle& oracle,
                        const TrustRegionConfig& config, const StepObserver& observer) {
  const auto t0 = Clock::now();
  const std::size_t d = state.x.size();

  IterationRecord rec;
  rec.k = state.k;
  rec.f_value = state.f_current;
  rec.grad_norm = norm(state.g_current);
  rec.delta_before = state.delta;

  const LinearOperator h = shifted(oracle.hessian_at(state.x), config.hessian_shift);
  QuadraticModel model{state.g_current, h};

  SubproblemOptions opt;
  opt.omega1 = config.omega1;
  opt.omega2 = config.omega2;
  opt.max_inner = config.max_inner;
  opt.trace = config.subproblem_trace;

  DenseVector xi(d);
  SubproblemResult sub;
  if (config.solver == SolverKind::TCG_CLASSIC) {
    sub = tcg_classic(model, state.delta, opt);
  } else if (config.sigma > 0.0) {
    Perturbation pert = draw(state, h, config);
    xi = std::move(pert.xi);
    sub = tcg_bg(model, state.delta, xi, opt, &pert.h_xi);
  } else {
    sub = tcg_bg(model, state.delta, xi, opt);
  }

  rec.theta = sub.model_start;
  rec.stop_reason = sub.stop_reason;
  rec.inner_iters = sub.iterations;
  rec.xi_norm = norm(xi);
  rec.model_decrease = sub.model_decrease;
  rec.step_norm = norm(sub.step);
  rec.r0_norm = sub.r0_norm;
  rec.inner_truncated = sub.truncated;

  const DenseVector trial = state.x + sub.step;
  rec.f_trial = oracle.value(trial);

  const double den = sub.model_decrease;
  if (den < -1e-12 * std::max(1.0, std::abs(sub.model_start))) {
    throw InvariantViolation("tr_step: negative model decrease " + std::to_string(den) +
                             " at iteration " + std::to_string(state.k));
  }
  if (den <= 1e-15 * std::max(1.0, std::abs(state.f_current))) {
    rec.rho = std::numeric_limits<double>::quiet_NaN();
  } else {
    rec.rho = (state.f_current - rec.f_trial + rec.theta) / den;
  }
  rec.accepted = rec.rho >= config.rho_prime;

  const TrustRegionState before = observer ? state : TrustRegionState{};

  if (rec.accepted) {
    state.x = trial;
    state.f_current = rec.f_trial;
    state.g_current = oracle.gradient(state.x);
  }
  if (!(rec.rho >= config.rho_prime)) {
    state.delta /= 4.0;
  } else if (rec.rho > config.rho_double_prime && sub.stop_reason == StopReason::OOB) {
    state.delta = std::min(2.0 * state.delta, config.delta_bar);
  }
  rec.delta_after = state.delta;
  ++state.k;

  const OracleCounters& c = oracle.counters();
  rec.hvp_cum = c.n_hvp;
  rec.f_cum = c.n_f;
  rec.grad_cum = c.n_grad;
  rec.wall_ms = ms_since(t0);

  if (observer) observer(StepEvent{before, xi, sub, rec});
  return rec;
}

std::uint64_t point_digest(const DenseVector& x) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double e : x) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &e, sizeof(double));
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

RunReport tr_run(ObjectiveOracle& oracle, const DenseVector& x0, const TrustRegionConfig& config,
                 const StepObserver& observer) {
  const auto t0 = Clock::now();
  const OracleCounters start = oracle.counters();

  RunReport report;
  TrustRegionState state;
  try {
    state = make_initial_state(oracle, x0, config);
  } catch (const OracleFault& e) {
    throw RunFault(0, e.what());
  }

  report.records.reserve(std::min<std::size_t>(config.max_outer, 4096));
  while (state.k < config.max_outer) {
    IterationRecord rec;
    try {
      rec = tr_step(state, oracle, config, observer);
    } catch (const OracleFault& e) {
      throw RunFault(state.k, e.what());
    }
    rec.hvp_cum -= start.n_hvp;
    rec.f_cum -= start.n_f;
    rec.grad_cum -= start.n_grad;
    const bool accepted = rec.accepted;
    report.records.push_back(rec);
    if (accepted && norm(state.g_current) <= config.grad_tol) {
      report.terminated_by = Termination::GRAD_TOL;
      break;
    }
  }

  report.x_final = state.x;
  report.final_point_digest = point_digest(state.x);
  report.final_f = state.f_current;
  report.final_grad_norm = norm(state.g_current);
  report.totals = minus(oracle.counters(), start);
  report.wall_time_ms = ms_since(t0);
  return report;
}

}  // namespace randtr
