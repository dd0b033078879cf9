#include "randtr/subproblem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace randtr {

namespace {

// Slack for "norm within radius" preconditions; callers land exactly on a
// sphere up to rounding.
constexpr double kRadiusSlack = 1e-12;

bool within(double n, double radius) { return n <= radius * (1.0 + kRadiusSlack); }

void check_model(const QuadraticModel& model) {
  if (model.g.empty()) throw DimensionError("QuadraticModel: empty gradient");
  if (!model.hvp) throw ArgumentError("QuadraticModel: missing hvp");
}

DenseVector apply(const QuadraticModel& model, const DenseVector& u, std::size_t& counter) {
  DenseVector hu = model.hvp(u);
  ++counter;
  if (hu.size() != model.dim()) throw DimensionError("QuadraticModel: hvp output length");
  hu.require_finite("QuadraticModel hvp");
  return hu;
}

bool is_zero(const DenseVector& v) {
  return std::all_of(v.begin(), v.end(), [](double e) { return e == 0.0; });
}

bool want_trace(TraceMode mode, std::size_t d) {
  switch (mode) {
    case TraceMode::On: return true;
    case TraceMode::Off: return false;
    case TraceMode::Auto: break;
  }
  return d <= 10000;
}

BoundaryStepResult boundary_gradient_step_counted(const QuadraticModel& model, double delta,
                                                  const DenseVector& v, const DenseVector& r,
                                                  std::size_t& hvps) {
  BoundaryStepResult out;
  out.residual_norm = norm(r);
  if (out.residual_norm == 0.0) {
    out.u = v;
    return out;
  }
  const DenseVector hr = apply(model, r, hvps);
  out.hvp_count = 1;
  const double rr = out.residual_norm * out.residual_norm;
  out.curvature = dot(r, hr);

  bool boundary = out.curvature <= 0.0;
  double s = 0.0;
  if (!boundary) {
    s = rr / out.curvature;
    const double vv = dot(v, v);
    const double vr = dot(v, r);
    boundary = vv + s * (2.0 * vr + s * rr) >= delta * delta;
  }
  if (boundary) s = sphere_step(v, r, delta);

  out.used_boundary = boundary;
  out.s = s;
  out.u = axpy(s, r, v);
  out.model_decrease = s * rr - 0.5 * s * s * out.curvature;
  return out;
}

struct CgSettings {
  double ball;        // CG stays strictly inside this radius
  double outer;       // radius for the boundary gradient step
  bool gradient_step; // false: classic Steihaug, stop on the ball sphere
};

SubproblemResult run_cg(const QuadraticModel& model, const DenseVector& xi,
                        const DenseVector* h_xi, const SubproblemOptions& opt,
                        const CgSettings& cs) {
  const std::size_t d = model.dim();
  const std::size_t max_inner = opt.max_inner == 0 ? default_max_inner(d) : opt.max_inner;
  const bool tracing = want_trace(opt.trace, d);

  SubproblemResult res;
  std::size_t hvps = 0;

  DenseVector hxi;
  if (h_xi != nullptr) {
    require_same_size(*h_xi, model.g, "tcg: H xi");
    hxi = *h_xi;
  } else if (is_zero(xi)) {
    hxi = DenseVector(d);
  } else {
    hxi = apply(model, xi, hvps);
  }

  res.model_start = dot(model.g, xi) + 0.5 * dot(hxi, xi);

  DenseVector v = xi;
  DenseVector r = -(hxi + model.g);
  double rr = dot(r, r);
  res.r0_norm = std::sqrt(rr);

  const double g_norm = norm(model.g);
  const double threshold = std::min(opt.omega1 * g_norm, opt.omega2 * g_norm * g_norm);

  SubproblemTrace trace;
  if (tracing) {
    trace.iterates.push_back(v);
    trace.residuals.push_back(r);
    trace.residual_norms.push_back(res.r0_norm);
  }

  auto finish = [&](StopReason stop, std::size_t T, std::size_t t_in) {
    res.stop_reason = stop;
    res.iterations = T;
    res.hvp_count = hvps;
    res.final_residual_norm = std::sqrt(rr);
    if (tracing) {
      trace.t_in = t_in;
      trace.hvp_count = hvps;
      trace.truncated = res.truncated;
      res.trace = std::move(trace);
    }
  };

  if (rr == 0.0) {
    res.step = v;
    finish(StopReason::RES, 0, 0);
    return res;
  }

  DenseVector p = r;
  const double ball_sq = cs.ball * cs.ball;

  for (std::size_t t = 1;; ++t) {
    if (t > max_inner) {
      res.truncated = true;
      res.step = v;
      finish(StopReason::RES, t - 1, t - 1);
      return res;
    }

    const DenseVector hp = apply(model, p, hvps);
    const double curv = dot(p, hp);
    const double vp = dot(v, p);
    const double pp = dot(p, p);
    const double vv = dot(v, v);
    const double rp = dot(r, p);

    bool leaves = curv <= 0.0;
    double alpha = std::numeric_limits<double>::infinity();
    if (!leaves) {
      alpha = rr / curv;
      leaves = vv + alpha * (2.0 * vp + alpha * pp) >= ball_sq;
    }
    if (tracing) {
      trace.directions.push_back(p);
      trace.curvatures.push_back(curv);
      trace.alphas.push_back(curv == 0.0 ? std::numeric_limits<double>::infinity() : rr / curv);
      trace.tentative.push_back(curv == 0.0 ? v : axpy(rr / curv, p, v));
    }

    if (leaves) {
      const double s = sphere_step(v, p, cs.ball);
      axpy_inplace(s, p, v);
      axpy_inplace(-s, hp, r);
      rr = dot(r, r);
      res.model_decrease += s * rp - 0.5 * s * s * curv;
      if (tracing) {
        trace.truncation_s = s;
        trace.iterates.push_back(v);
        trace.residuals.push_back(r);
        trace.residual_norms.push_back(std::sqrt(rr));
      }
      if (cs.gradient_step) {
        BoundaryStepResult bg = boundary_gradient_step_counted(model, cs.outer, v, r, hvps);
        res.model_decrease += bg.model_decrease;
        res.step = bg.u;
        res.boundary = std::move(bg);
      } else {
        res.step = v;
      }
      finish(StopReason::OOB, t, t - 1);
      return res;
    }

    axpy_inplace(alpha, p, v);
    axpy_inplace(-alpha, hp, r);
    const double rr_new = dot(r, r);
    res.model_decrease += alpha * rp - 0.5 * alpha * alpha * curv;
    if (tracing) {
      trace.iterates.push_back(v);
      trace.residuals.push_back(r);
      trace.residual_norms.push_back(std::sqrt(rr_new));
    }
    if (std::sqrt(rr_new) <= threshold) {
      rr = rr_new;
      res.step = v;
      finish(StopReason::RES, t, t);
      return res;
    }
    const double beta = rr_new / rr;
    rr = rr_new;
    if (tracing) trace.betas.push_back(beta);
    scale_add_inplace(beta, p, r);
  }
}

void check_common(const QuadraticModel& model, double delta, const SubproblemOptions& opt) {
  check_model(model);
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ArgumentError("tcg: delta must be positive");
  if (!(opt.omega1 > 0.0 && opt.omega1 < 1.0)) throw ArgumentError("tcg: omega1 must be in (0,1)");
  if (!(opt.omega2 > 0.0) || !std::isfinite(opt.omega2)) {
    throw ArgumentError("tcg: omega2 must be positive");
  }
}

}  // namespace

double QuadraticModel::value(const DenseVector& v) const {
  require_same_size(v, g, "QuadraticModel::value");
  const DenseVector hv = hvp(v);
  return dot(g, v) + 0.5 * dot(hv, v);
}

DenseVector QuadraticModel::residual(const DenseVector& v) const {
  require_same_size(v, g, "QuadraticModel::residual");
  return -(hvp(v) + g);
}

std::string_view to_string(StopReason s) noexcept { return s == StopReason::RES ? "RES" : "OOB"; }

std::size_t default_max_inner(std::size_t d) noexcept {
  return std::min<std::size_t>(10 * d, 10000);
}

double sphere_step(const DenseVector& v, const DenseVector& p, double radius) {
  const double vv = dot(v, v);
  const double vp = dot(v, p);
  const double pp = dot(p, p);
  if (pp == 0.0) throw NumericalError("sphere_step: zero direction");
  const double gap = radius * radius - vv;
  const double disc = std::max(0.0, vp * vp + pp * gap);
  double s;
  if (vp >= 0.0) {
    const double den = vp + std::sqrt(disc);
    s = den > 0.0 ? gap / den : 0.0;
  } else {
    s = (-vp + std::sqrt(disc)) / pp;
  }
  return std::max(0.0, s);
}

BoundaryStepResult boundary_gradient_step(const QuadraticModel& model, double delta,
                                          const DenseVector& v, const DenseVector* residual) {
  check_model(model);
  if (!(delta > 0.0)) throw ArgumentError("boundary_gradient_step: delta must be positive");
  require_same_size(v, model.g, "boundary_gradient_step");
  if (!within(norm(v), delta)) throw ArgumentError("boundary_gradient_step: ||v|| > delta");
  std::size_t hvps = 0;
  DenseVector r;
  if (residual != nullptr) {
    require_same_size(*residual, model.g, "boundary_gradient_step: residual");
    r = *residual;
  } else {
    r = -(apply(model, v, hvps) + model.g);
  }
  BoundaryStepResult out = boundary_gradient_step_counted(model, delta, v, r, hvps);
  out.hvp_count = hvps;
  return out;
}

SubproblemResult tcg_bg(const QuadraticModel& model, double delta, const DenseVector& xi,
                        const SubproblemOptions& options, const DenseVector* h_xi) {
  check_common(model, delta, options);
  require_same_size(xi, model.g, "tcg_bg: xi");
  if (!within(norm(xi), delta / 4.0)) throw ArgumentError("tcg_bg: ||xi|| > delta/4");
  return run_cg(model, xi, h_xi, options, {delta / 2.0, delta, true});
}

SubproblemResult tcg_classic(const QuadraticModel& model, double delta,
                             const SubproblemOptions& options) {
  check_common(model, delta, options);
  return run_cg(model, DenseVector(model.dim()), nullptr, options, {delta, delta, false});
}

bool check_cg_shift_equivalence(const QuadraticModel& model, const DenseVector& xi,
                                std::size_t steps) {
  check_model(model);
  require_same_size(xi, model.g, "check_cg_shift_equivalence: xi");

  // Radius large enough that only curvature can end the CG phase.
  const double big = 1e6 * (1.0 + norm(xi) + norm(model.g));
  SubproblemOptions opt;
  opt.trace = TraceMode::On;
  // Vanishing threshold: the runs stop at max_inner, not on the residual.
  opt.omega1 = 0.5;
  opt.omega2 = 1e-300;
  opt.max_inner = std::max<std::size_t>(steps, 1);

  const SubproblemResult shifted = tcg_bg(model, 4.0 * big, xi, opt);

  QuadraticModel translated{model.g + model.hvp(xi), model.hvp};
  const SubproblemResult origin = tcg_bg(translated, 4.0 * big, DenseVector(model.dim()), opt);

  const SubproblemTrace& a = *shifted.trace;
  const SubproblemTrace& b = *origin.trace;
  const std::size_t avail = std::min(a.t_in, b.t_in);
  const bool a_done = shifted.stop_reason == StopReason::RES && !shifted.truncated;
  const bool b_done = origin.stop_reason == StopReason::RES && !origin.truncated;
  if (steps > avail && !(a_done && b_done)) {
    throw ArgumentError("check_cg_shift_equivalence: steps exceeds the CG phase (t_in = " +
                        std::to_string(avail) + ")");
  }
  const std::size_t upto = std::min(steps, std::min(a.iterates.size(), b.iterates.size()) - 1);
  for (std::size_t t = 0; t <= upto; ++t) {
    if (a.iterates.size() <= t || b.iterates.size() <= t) return false;
    for (std::size_t i = 0; i < xi.size(); ++i) {
      const double lhs = a.iterates[t][i];
      const double rhs = xi[i] + b.iterates[t][i];
      const double scale = std::max({std::abs(lhs), std::abs(xi[i]) + std::abs(b.iterates[t][i])});
      if (std::abs(lhs - rhs) > 1e-9 * scale) return false;
    }
  }
  return true;
}

}  // namespace randtr
