#include "randtr/props.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/beta.hpp>

#include "randtr/trust_region.hpp"

namespace randtr::props {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t pick_dim(CounterRng& rng, std::size_t lo, std::size_t hi) {
  hi = std::max(hi, lo);
  return lo + static_cast<std::size_t>(rng.next_u64() % (hi - lo + 1));
}

DenseVector gaussian_scaled(std::size_t d, double scale, CounterRng& rng) {
  return scaled(scale, sample_gaussian(d, rng));
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

Vec to_eigen(const DenseVector& v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

DenseVector from_eigen(const Vec& v) {
  return DenseVector(std::vector<double>(v.data(), v.data() + v.size()));
}

Mat dense_hessian(const ObjectiveOracle& oracle, const DenseVector& x) {
  ObjectiveOracle copy = oracle;
  const std::size_t d = copy.dim();
  const HessianAt h = copy.hessian_at(x);
  Mat out(d, d);
  for (std::size_t j = 0; j < d; ++j) {
    out.col(static_cast<Eigen::Index>(j)) = to_eigen(h(DenseVector::unit(d, j)));
  }
  return 0.5 * (out + out.transpose());
}

QuadraticModel model_from(const Mat& h, const DenseVector& g) {
  return QuadraticModel{g, [h](const DenseVector& u) { return from_eigen(h * to_eigen(u)); }};
}

double model_value(const Mat& h, const DenseVector& g, const DenseVector& v) {
  const Vec ve = to_eigen(v);
  return to_eigen(g).dot(ve) + 0.5 * ve.dot(h * ve);
}

Spectrum eigen_of(const Mat& h) {
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  Spectrum s{es.eigenvalues(), es.eigenvectors(), 0.0};
  s.op_norm = s.values.cwiseAbs().maxCoeff();
  return s;
}

Mat random_orthogonal(std::size_t d, CounterRng& rng) {
  Mat a(d, d);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < d; ++i) a(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Mat> qr(a);
  Mat q = qr.householderQ() * Mat::Identity(d, d);
  // Fix column signs so the draw does not depend on QR conventions.
  const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (std::size_t j = 0; j < d; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

Mat with_spectrum(const std::vector<double>& eig, CounterRng& rng) {
  const std::size_t d = eig.size();
  const Mat q = random_orthogonal(d, rng);
  Vec lam(d);
  for (std::size_t i = 0; i < d; ++i) lam[i] = eig[i];
  Mat h = q * lam.asDiagonal() * q.transpose();
  return 0.5 * (h + h.transpose());
}

QuadInstance random_nonconvex(CounterRng& rng, std::size_t max_dim) {
  const std::size_t d = pick_dim(rng, 3, max_dim);
  const double lmin = -rng.uniform(0.1, 2.0);
  std::vector<double> eig{lmin};
  while (eig.size() < d) {
    const double mag = rng.uniform(0.1, 2.0);
    const double e = rng.uniform() < 0.3 ? -mag : mag;
    if (e > lmin) eig.push_back(e);
  }
  QuadInstance q;
  q.h = with_spectrum(eig, rng);
  q.g = sample_gaussian(d, rng);
  const double vbar = (q.h.ldlt().solve(to_eigen(q.g))).norm();
  q.delta = vbar * rng.uniform(2.0, 20.0);
  q.xi = scaled(0.25 * q.delta * rng.uniform(0.1, 1.0), sample_unit_sphere(d, rng));
  return q;
}

QuadInstance random_mixed(CounterRng& rng, std::size_t max_dim) {
  const std::size_t d = pick_dim(rng, 2, max_dim);
  const bool spd = rng.uniform() < 0.5;
  std::vector<double> eig(d);
  for (double& e : eig) e = spd ? rng.uniform(0.05, 5.0) : rng.uniform(-5.0, 5.0);
  QuadInstance q;
  q.h = with_spectrum(eig, rng);
  q.g = gaussian_scaled(d, std::pow(10.0, rng.uniform(-3.0, 1.0)), rng);
  q.delta = std::pow(10.0, rng.uniform(-2.0, 1.0));
  const double frac = rng.uniform() < 0.1 ? 0.0 : rng.uniform();
  q.xi = scaled(0.25 * q.delta * frac, sample_unit_sphere(d, rng));
  return q;
}

QuadInstance random_banded(CounterRng& rng, double nu, double lg, std::size_t max_dim) {
  const std::size_t d = pick_dim(rng, 2, max_dim);
  std::vector<double> eig(d);
  for (double& e : eig) e = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(nu, lg);
  QuadInstance q;
  q.h = with_spectrum(eig, rng);
  q.g = gaussian_scaled(d, std::pow(10.0, rng.uniform(-4.0, 0.0)), rng);
  q.delta = std::pow(10.0, rng.uniform(-1.0, 1.0));
  q.xi = scaled(0.25 * q.delta * rng.uniform(0.2, 1.0), sample_unit_sphere(d, rng));
  if ((q.h * to_eigen(q.xi)).dot(to_eigen(q.g)) < 0.0) q.xi = -q.xi;
  return q;
}

QuadInstance random_spd_interior(CounterRng& rng, std::size_t max_dim) {
  const std::size_t d = pick_dim(rng, 2, max_dim);
  std::vector<double> eig(d);
  for (double& e : eig) e = rng.uniform(0.1, 5.0);
  QuadInstance q;
  q.h = with_spectrum(eig, rng);
  q.g = sample_gaussian(d, rng);
  const double vstar = q.h.ldlt().solve(to_eigen(q.g)).norm();
  q.delta = 4.0 * vstar * rng.uniform(1.05, 3.0);
  q.xi = scaled(0.125 * q.delta * rng.uniform(), sample_unit_sphere(d, rng));
  return q;
}

std::vector<Vec> reference_cg(const Mat& h, const Vec& g, const Vec& x0, std::size_t max_steps,
                              double tol) {
  std::vector<Vec> xs{x0};
  Vec x = x0;
  Vec r = -(h * x + g);
  Vec p = r;
  double rr = r.squaredNorm();
  for (std::size_t k = 0; k < max_steps && std::sqrt(rr) > tol; ++k) {
    const Vec hp = h * p;
    const double alpha = rr / p.dot(hp);
    x += alpha * p;
    r -= alpha * hp;
    const double rr_new = r.squaredNorm();
    p = r + (rr_new / rr) * p;
    rr = rr_new;
    xs.push_back(x);
  }
  return xs;
}

Verdict check_divergence_law(const Mat& h, const DenseVector& g, const SubproblemResult& res,
                             double slack) {
  Verdict v;
  if (!res.trace) {
    v.fail("no trace");
    return v;
  }
  const SubproblemTrace& tr = *res.trace;
  const Spectrum sp = eigen_of(h);
  const Vec ge = to_eigen(g);
  // vbar = -H^+ g
  Vec vbar = Vec::Zero(ge.size());
  for (Eigen::Index i = 0; i < sp.values.size(); ++i) {
    if (sp.values[i] != 0.0) vbar -= (sp.vectors.col(i).dot(ge) / sp.values[i]) * sp.vectors.col(i);
  }
  for (Eigen::Index i = 0; i < sp.values.size(); ++i) {
    const double lam = sp.values[i];
    if (lam >= 0.0) continue;
    const Vec q = sp.vectors.col(i);
    const double base = std::abs((to_eigen(tr.iterates[0]) - vbar).dot(q));
    const double rate = 1.0 + std::abs(lam) / sp.op_norm;
    for (std::size_t t = 0; t <= tr.t_in; ++t) {
      const double lhs = std::abs((to_eigen(tr.iterates[t]) - vbar).dot(q));
      const double rhs = (1.0 - slack) * std::pow(rate, static_cast<double>(t)) * base;
      ++v.checked;
      if (lhs < rhs) {
        v.fail("t=" + std::to_string(t) + " lambda=" + fmt(lam) + ": " + fmt(lhs) + " < " +
               fmt(rhs));
      }
    }
  }
  return v;
}

DecreaseLedger decrease_ledger(const Mat& h, const DenseVector& g, double delta,
                               const DenseVector& xi, const SubproblemResult& res) {
  DecreaseLedger out;
  out.observed = model_value(h, g, xi) - model_value(h, g, res.step);
  const double lg = eigen_of(h).op_norm;
  const double r0 = res.r0_norm;
  const bool oob = res.stop_reason == StopReason::OOB;
  if (res.iterations >= 1) {
    // v^(1) sits on the inner sphere exactly when the very first step left it.
    const bool first_on_sphere = oob && res.iterations == 1;
    out.w1 = first_on_sphere ? delta * r0 / 8.0 : (lg > 0.0 ? r0 * r0 / (2.0 * lg) : kInf);
  }
  if (oob && res.boundary) {
    const double rt = res.boundary->residual_norm;
    out.w2 = std::min(lg > 0.0 ? rt * rt / (2.0 * lg) : kInf, delta * rt / 4.0);
  }
  return out;
}

double oob_decrease_floor(double nu, double lg, double delta) {
  return nu * nu * delta * delta / (32.0 * lg);
}

Verdict check_steihaug(const Mat& h, const DenseVector& g, const DenseVector& xi,
                       const SubproblemResult& res, const SubproblemOptions& options,
                       double tol) {
  Verdict v;
  if (!res.trace) {
    v.fail("no trace");
    return v;
  }
  if (res.stop_reason != StopReason::RES || res.truncated) {
    v.fail("did not stop on the residual rule");
    return v;
  }
  const SubproblemTrace& tr = *res.trace;
  const double gn = norm(g);
  const double thr = std::min(options.omega1 * gn, options.omega2 * gn * gn);
  const Vec x0 = to_eigen(xi);
  const std::vector<Vec> ref = reference_cg(h, to_eigen(g), x0, 10 * g.size() + 10, thr);
  if (ref.size() != tr.iterates.size()) {
    v.fail("iteration count " + std::to_string(tr.iterates.size() - 1) + " vs reference " +
           std::to_string(ref.size() - 1));
    return v;
  }
  for (std::size_t t = 0; t < ref.size(); ++t) {
    for (std::size_t i = 0; i < xi.size(); ++i) {
      const double a = tr.iterates[t][i];
      const double b = ref[t][static_cast<Eigen::Index>(i)];
      ++v.checked;
      if (std::abs(a - b) > tol * std::max(std::abs(a), std::abs(b))) {
        v.fail("iterate " + std::to_string(t) + " entry " + std::to_string(i) + ": " + fmt(a) +
               " vs " + fmt(b));
      }
    }
  }
  const Vec vstar = h.ldlt().solve(-to_eigen(g));
  const double cap = (vstar - x0).norm();
  double prev = 0.0;
  for (std::size_t t = 0; t < tr.tentative.size(); ++t) {
    const double dist = (to_eigen(tr.tentative[t]) - x0).norm();
    ++v.checked;
    if (dist < prev * (1.0 - 1e-12)) {
      v.fail("tentative distance decreased at t=" + std::to_string(t) + ": " + fmt(dist) + " < " +
             fmt(prev));
    }
    if (dist > cap * (1.0 + 1e-9)) {
      v.fail("tentative distance " + fmt(dist) + " beyond ||v* - v0|| = " + fmt(cap));
    }
    prev = dist;
  }
  return v;
}

double convex_inner_cap(double lg, double nu, double g_norm, double r0_norm, double omega1,
                        double omega2) {
  if (g_norm == 0.0 || !(nu > 0.0)) return kInf;
  const double thr = std::min(omega1 * g_norm, omega2 * g_norm * g_norm);
  const double k = std::sqrt(lg / nu);
  return 1.0 + k * std::log(2.0 * k * r0_norm / thr);
}

double negative_curvature_inner_cap(double lg, double lambda_min, double r0_norm,
                                    double r0_along_qmin) {
  if (!(lambda_min < 0.0) || r0_along_qmin == 0.0) return kInf;
  const double ratio = r0_norm * r0_norm / (r0_along_qmin * r0_along_qmin);
  return 1.5 + std::sqrt(lg / (8.0 * std::abs(lambda_min))) * std::log(4.0 * ratio - 2.0);
}

double large_gradient_inner_cap(double lg, double delta, double g_norm, double r0_norm,
                                double omega1, double omega2) {
  if (g_norm == 0.0) return kInf;
  const double thr = std::min(omega1 * g_norm, omega2 * g_norm * g_norm);
  return 1.0 + 2.0 * lg * delta * r0_norm / (thr * thr);
}

void InnerAudit::record(bool ok, const std::string& what) {
  ++checked;
  if (!ok) {
    if (violations == 0) first_violation = what;
    ++violations;
  }
}

void InnerAudit::audit_dense(const Mat& h, const DenseVector& g, double delta,
                             const DenseVector& xi, std::size_t iterations, double omega1,
                             double omega2) {
  const Spectrum sp = eigen_of(h);
  const Vec r0 = h * to_eigen(xi) + to_eigen(g);
  const double gn = norm(g);
  const double T = static_cast<double>(iterations);
  const double lmin = sp.values[0];
  if (iterations == 0) {
    record(true, "");
    return;
  }
  if (lmin > 0.0) {
    const double cap = convex_inner_cap(sp.op_norm, lmin, gn, r0.norm(), omega1, omega2);
    record(T <= cap, "convex cap: T=" + fmt(T) + " > " + fmt(cap));
  } else if (lmin < 0.0) {
    const double along = sp.vectors.col(0).dot(r0);
    const double cap = negative_curvature_inner_cap(sp.op_norm, lmin, r0.norm(), along);
    record(T <= cap, "negative-curvature cap: T=" + fmt(T) + " > " + fmt(cap));
  }
  audit_cap(sp.op_norm, delta, gn, r0.norm(), iterations, omega1, omega2);
}

void InnerAudit::audit_cap(double lg, double delta, double g_norm, double r0_norm,
                           std::size_t iterations, double omega1, double omega2) {
  if (g_norm == 0.0) return;
  const double cap = large_gradient_inner_cap(lg, delta, g_norm, r0_norm, omega1, omega2);
  const double T = static_cast<double>(iterations);
  record(T <= cap, "large-gradient cap: T=" + fmt(T) + " > " + fmt(cap));
}

double ks_abs_projection(std::size_t d, std::size_t n, std::uint64_t seed) {
  if (d < 2 || n < 1) throw ArgumentError("ks_abs_projection: need d >= 2 and n >= 1");
  CounterRng qrng(seed, 101);
  const DenseVector q = sample_unit_sphere(d, qrng);
  CounterRng rng(seed, 102);
  std::vector<double> t(n);
  for (double& s : t) s = std::abs(dot(q, sample_unit_sphere(d, rng)));
  std::sort(t.begin(), t.end());
  const double a = 0.5;
  const double b = 0.5 * static_cast<double>(d - 1);
  double ks = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::min(1.0, t[i] * t[i]);
    const double cdf = boost::math::ibeta(a, b, x);
    ks = std::max({ks, static_cast<double>(i + 1) / n - cdf, cdf - static_cast<double>(i) / n});
  }
  return ks;
}

ConcentrationCheck concentration_of_perturbation(std::size_t d, std::size_t n, double delta,
                                                 double offset, std::uint64_t seed) {
  if (d < 3) throw ArgumentError("concentration_of_perturbation: need d >= 3");
  CounterRng rng(seed, 103);
  std::vector<double> eig(d);
  for (double& e : eig) e = rng.uniform(-2.0, 2.0);
  const Mat h = with_spectrum(eig, rng);
  const DenseVector b = sample_gaussian(d, rng);
  const DenseVector z = sample_unit_sphere(d, rng);

  ObjectiveOracle oracle(
      d, [h, b](const DenseVector& x) { return model_value(h, b, x); },
      [h, b](const DenseVector& x) { return from_eigen(h * to_eigen(x)) + b; },
      [h](const DenseVector&, const DenseVector& u) { return from_eigen(h * to_eigen(u)); });
  TrustRegionConfig cfg;
  cfg.sigma = 1.0;
  cfg.delta0 = 8.0;
  cfg.delta_bar = 8.0;
  cfg.seed = seed;
  TrustRegionState st = make_initial_state(oracle, sample_gaussian(d, rng), cfg);

  const double scale = std::sqrt(std::numbers::pi / (8.0 * static_cast<double>(d)));
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Perturbation p = sample_perturbation(st, oracle, cfg);
    const double xn = norm(p.xi);
    if (std::abs(dot(z, p.xi) + offset * xn) < delta * xn * scale) ++hits;
  }
  ConcentrationCheck c;
  c.delta = delta;
  c.offset = offset;
  c.frequency = static_cast<double>(hits) / static_cast<double>(n);
  c.standard_error = std::sqrt(delta * (1.0 - delta) / static_cast<double>(n));
  c.ok = c.frequency <= delta + 2.0 * c.standard_error;
  return c;
}

std::vector<SuiteResult> run_property_suites(std::size_t max_dim, std::uint64_t seed) {
  std::vector<SuiteResult> out;
  SubproblemOptions traced;
  traced.trace = TraceMode::On;

  {
    CounterRng rng(seed, 201);
    Verdict all;
    for (int i = 0; i < 30; ++i) {
      const QuadInstance q = random_nonconvex(rng, max_dim);
      const SubproblemResult r = tcg_bg(model_from(q.h, q.g), q.delta, q.xi, traced);
      const Verdict v = check_divergence_law(q.h, q.g, r);
      all.checked += v.checked;
      if (!v.ok) all.fail(v.detail);
    }
    out.push_back({"cg_divergence", all.ok, all.ok ? std::to_string(all.checked) + " checks" : all.detail});
  }
  {
    CounterRng rng(seed, 202);
    bool ok = true;
    std::string detail = "100 calls";
    for (int i = 0; i < 100 && ok; ++i) {
      const QuadInstance q = random_mixed(rng, max_dim);
      const SubproblemResult r = tcg_bg(model_from(q.h, q.g), q.delta, q.xi);
      const DecreaseLedger led = decrease_ledger(q.h, q.g, q.delta, q.xi, r);
      if (led.observed < led.w1 + led.w2 - 1e-10) {
        ok = false;
        detail = "decrease " + fmt(led.observed) + " < W1 + W2 = " + fmt(led.w1 + led.w2);
      }
    }
    out.push_back({"model_decrease", ok, detail});
  }
  {
    CounterRng rng(seed, 203);
    bool ok = true;
    std::size_t oob = 0;
    std::string detail;
    for (int i = 0; i < 100 && ok; ++i) {
      const double nu = rng.uniform(0.1, 1.0);
      const double lg = nu * rng.uniform(1.0, 20.0);
      const QuadInstance q = random_banded(rng, nu, lg, max_dim);
      const SubproblemResult r = tcg_bg(model_from(q.h, q.g), q.delta, q.xi);
      if (r.stop_reason != StopReason::OOB) continue;
      ++oob;
      const double dec = model_value(q.h, q.g, q.xi) - model_value(q.h, q.g, r.step);
      const double floor = oob_decrease_floor(nu, lg, q.delta);
      if (dec < floor - 1e-10) {
        ok = false;
        detail = "decrease " + fmt(dec) + " < floor " + fmt(floor);
      }
    }
    out.push_back({"oob_decrease_floor", ok, ok ? std::to_string(oob) + " OOB calls" : detail});
  }
  {
    CounterRng rng(seed, 204);
    Verdict all;
    for (int i = 0; i < 50; ++i) {
      const QuadInstance q = random_spd_interior(rng, max_dim);
      const SubproblemResult r = tcg_bg(model_from(q.h, q.g), q.delta, q.xi, traced);
      const Verdict v = check_steihaug(q.h, q.g, q.xi, r, traced);
      all.checked += v.checked;
      if (!v.ok) all.fail(v.detail);
    }
    out.push_back({"steihaug_interior", all.ok, all.ok ? std::to_string(all.checked) + " checks" : all.detail});
  }
  {
    CounterRng rng(seed, 205);
    bool ok = true;
    for (int i = 0; i < 20 && ok; ++i) {
      const QuadInstance q = random_spd_interior(rng, max_dim);
      ok = check_cg_shift_equivalence(model_from(q.h, q.g), q.xi, 2);
    }
    out.push_back({"cg_shift_equivalence", ok, ok ? "20 instances" : "iterates differ"});
  }
  {
    CounterRng rng(seed, 206);
    InnerAudit audit;
    for (int i = 0; i < 100; ++i) {
      const QuadInstance q = random_mixed(rng, max_dim);
      const SubproblemResult r = tcg_bg(model_from(q.h, q.g), q.delta, q.xi);
      audit.audit_dense(q.h, q.g, q.delta, q.xi, r.iterations, 0.1, 1.0);
    }
    out.push_back({"inner_iteration_caps", audit.violations == 0,
                   audit.violations == 0 ? std::to_string(audit.checked) + " checks"
                                         : audit.first_violation});
  }
  {
    const double ks = ks_abs_projection(10, 20000, seed);
    out.push_back({"sampler_ks", ks <= 0.02, "KS = " + fmt(ks)});
  }
  {
    bool ok = true;
    std::string detail;
    for (double delta : {0.1, 0.5}) {
      const ConcentrationCheck c = concentration_of_perturbation(10, 20000, delta, 0.0, seed);
      ok = ok && c.ok;
      detail += "delta=" + fmt(delta) + " freq=" + fmt(c.frequency) + " ";
    }
    out.push_back({"perturbation_concentration", ok, detail});
  }
  return out;
}

}  // namespace randtr::props
