#include <cmath>
#include <limits>

#include "doctest.h"
#include "randtr/problems.hpp"
#include "randtr/theory.hpp"
#include "randtr/trust_region.hpp"
#include "support.hpp"

using namespace randtr;
namespace pr = randtr::props;
using testsupport::quadratic;

namespace {

ObjectiveOracle saddle_quadratic() {
  return quadratic(testsupport::diag({-1, 1, 2}), pr::Vec::Zero(3));
}

}  // namespace

TEST_CASE("perturbation radius rules") {
  TrustRegionConfig c;
  c.xi_rule = XiRule::THEORY;
  c.sigma = 1e-6;
  CHECK(perturbation_radius(c, 1.0) == 1e-6);
  c.sigma = 1.0;
  CHECK(perturbation_radius(c, 1.0) == 0.25);
  c.xi_rule = XiRule::PRACTICAL;
  c.sigma = 1e-12;
  CHECK(perturbation_radius(c, 1.0) == std::sqrt(std::numeric_limits<double>::epsilon()));
  c.sigma = 1.0;
  CHECK(perturbation_radius(c, 1.0) == 0.01);
}

TEST_CASE("sampled perturbation has the right norm and sign") {
  ObjectiveOracle o = quadratic(testsupport::diag({-1, 0.5, 2, 3}), pr::Vec::Ones(4));
  TrustRegionConfig c;
  c.sigma = 1e-3;
  TrustRegionState st = make_initial_state(o, DenseVector{0.3, -0.2, 0.1, 0.5}, c);
  const auto before = o.counters().n_hvp;
  for (int i = 0; i < 1000; ++i) {
    const Perturbation p = sample_perturbation(st, o, c);
    CHECK(norm(p.xi) == doctest::Approx(1e-3).epsilon(1e-12));
    CHECK(dot(p.h_xi, st.g_current) >= 0.0);
    CHECK(p.curvature_alignment >= 0.0);
  }
  CHECK(o.counters().n_hvp - before == 1000);
  c.sigma = 0.0;
  CHECK_THROWS_AS(sample_perturbation(st, o, c), ArgumentError);
}

TEST_CASE("config validation") {
  TrustRegionConfig c;
  c.validate();
  auto bad = [&](auto mutate) {
    TrustRegionConfig b;
    mutate(b);
    CHECK_THROWS_AS(b.validate(), ArgumentError);
  };
  bad([](TrustRegionConfig& b) { b.rho_prime = 0.0; });
  bad([](TrustRegionConfig& b) { b.rho_double_prime = 0.05; });
  bad([](TrustRegionConfig& b) { b.delta0 = 20.0; });
  bad([](TrustRegionConfig& b) { b.sigma = 1.0; });  // 4 sigma > delta0 under THEORY
  bad([](TrustRegionConfig& b) { b.omega1 = 1.0; });
  bad([](TrustRegionConfig& b) { b.hessian_shift = -1.0; });
  bad([](TrustRegionConfig& b) { b.max_outer = 0; });
  bad([](TrustRegionConfig& b) {
    b.solver = SolverKind::TCG_CLASSIC;
    b.sigma = 1e-6;
  });
}

TEST_CASE("exact quadratic gives rho = 1") {
  CounterRng rng(1);
  const pr::Mat h = pr::with_spectrum({-2, 0.5, 1, 3, 4}, rng);
  ObjectiveOracle o = quadratic(h, pr::to_eigen(sample_gaussian(5, rng)));
  for (double sigma : {0.0, 1e-4}) {
    TrustRegionConfig c;
    c.sigma = sigma;
    TrustRegionState st = make_initial_state(o, sample_gaussian(5, rng), c);
    for (int k = 0; k < 5; ++k) {
      const auto rec = tr_step(st, o, c);
      CHECK(rec.rho == doctest::Approx(1.0).epsilon(1e-6));
      CHECK(rec.accepted);
    }
  }
}

TEST_CASE("rejected step shrinks the radius and keeps x") {
  // Gradient and Hessian say "downhill", values say "uphill".
  ObjectiveOracle liar(
      2, [](const DenseVector& x) { return norm(x) == 0.0 ? 0.0 : 1.0; },
      [](const DenseVector&) { return DenseVector{1, 0}; },
      [](const DenseVector&, const DenseVector& u) { return u; });
  TrustRegionConfig c;
  c.sigma = 0.0;
  TrustRegionState st = make_initial_state(liar, DenseVector(2), c);
  const auto rec = tr_step(st, liar, c);
  CHECK(rec.rho < c.rho_prime);
  CHECK_FALSE(rec.accepted);
  CHECK(st.delta == doctest::Approx(c.delta0 / 4));
  CHECK(st.x == DenseVector(2));
  CHECK(rec.delta_after == st.delta);
}

TEST_CASE("radius growth is capped by delta_bar") {
  // Linear f: zero curvature, exact model, every step OOB with rho = 1.
  ObjectiveOracle lin(
      3, [](const DenseVector& x) { return x[0] - 2 * x[2]; },
      [](const DenseVector&) { return DenseVector{1, 0, -2}; },
      [](const DenseVector&, const DenseVector& u) { return DenseVector(u.size()); });
  TrustRegionConfig c;
  c.sigma = 0.0;
  c.delta0 = 1.0;
  c.delta_bar = 3.0;
  TrustRegionState st = make_initial_state(lin, DenseVector(3), c);
  std::vector<double> radii;
  for (int k = 0; k < 4; ++k) {
    const auto rec = tr_step(st, lin, c);
    CHECK(rec.stop_reason == StopReason::OOB);
    CHECK(rec.accepted);
    radii.push_back(st.delta);
  }
  CHECK(radii == std::vector<double>{2.0, 3.0, 3.0, 3.0});
}

TEST_CASE("convex quadratic converges quickly") {
  CounterRng rng(10);
  std::vector<double> spec;
  for (int i = 0; i < 10; ++i) spec.push_back(1.0 + 99.0 * i / 9.0);
  const pr::Mat a = pr::with_spectrum(spec, rng);
  const pr::Vec b = pr::to_eigen(sample_gaussian(10, rng));
  ObjectiveOracle o = quadratic(a, -b);
  for (auto solver : {SolverKind::TCG_BG, SolverKind::TCG_CLASSIC}) {
    TrustRegionConfig c;
    c.solver = solver;
    c.sigma = solver == SolverKind::TCG_BG ? 1e-6 : 0.0;
    c.grad_tol = 1e-9;
    c.max_outer = 30;
    const RunReport rep = tr_run(o, sample_gaussian(10, rng), c);
    CHECK(rep.terminated_by == Termination::GRAD_TOL);
    CHECK(rep.final_grad_norm <= 1e-9);
    const pr::Vec xs = a.ldlt().solve(b);
    CHECK((pr::to_eigen(rep.x_final) - xs).norm() <= 1e-8);
  }
}

TEST_CASE("deterministic baseline is stuck at a saddle, randomized escapes") {
  ObjectiveOracle o = saddle_quadratic();
  TrustRegionConfig base;
  base.solver = SolverKind::TCG_CLASSIC;
  base.sigma = 0.0;
  base.max_outer = 20;
  const RunReport stuck = tr_run(o, DenseVector(3), base);
  CHECK(stuck.x_final == DenseVector(3));
  for (const auto& r : stuck.records) CHECK(r.inner_iters == 0);

  ProblemInstance sine = make_sine_saddle(200, 3);
  TrustRegionConfig rnd;
  rnd.max_outer = 50;
  const RunReport esc = tr_run(sine.oracle, DenseVector(200), rnd);
  CHECK(esc.final_f < 1e-2);
}

TEST_CASE("runs are reproducible from the seed") {
  ProblemInstance p = make_sine_saddle(50, 4);
  TrustRegionConfig c;
  c.max_outer = 20;
  c.seed = 77;
  ObjectiveOracle o1 = p.oracle, o2 = p.oracle;
  const RunReport a = tr_run(o1, DenseVector(50), c);
  const RunReport b = tr_run(o2, DenseVector(50), c);
  REQUIRE(a.records.size() == b.records.size());
  CHECK(a.final_point_digest == b.final_point_digest);
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].f_value == b.records[i].f_value);
    CHECK(a.records[i].rho == b.records[i].rho);
  }
  c.seed = 78;
  ObjectiveOracle o3 = p.oracle;
  CHECK(tr_run(o3, DenseVector(50), c).final_point_digest != a.final_point_digest);
}

TEST_CASE("per-iteration accounting invariants") {
  ProblemInstance p = make_sine_saddle(60, 5);
  for (double sigma : {1e-6, 1e-3}) {
    TrustRegionConfig c;
    c.sigma = sigma;
    c.max_outer = 80;
    c.delta_bar = 4.0;
    ObjectiveOracle o = p.oracle;
    ObjectiveOracle probe = p.oracle;
    OracleCounters last{1, 1, 0};  // f and grad at x0
    double lg_est = 0.0;
    std::size_t successes = 0;
    std::size_t checked_decrease = 0;
    const StepObserver obs = [&](const StepEvent& ev) {
      const IterationRecord& r = ev.record;
      // HVPs: inner iterations, boundary step, and the sign check on xi.
      std::uint64_t expected = r.inner_iters + (sigma > 0 ? 1 : 0);
      if (ev.sub.boundary) expected += ev.sub.boundary->hvp_count;
      CHECK(r.hvp_cum - last.n_hvp == expected);
      CHECK(r.f_cum - last.n_f == 1);
      CHECK(r.grad_cum - last.n_grad == (r.accepted ? 1u : 0u));
      last = {r.f_cum, r.grad_cum, r.hvp_cum};

      CHECK(r.accepted == (r.rho >= c.rho_prime));
      if (r.accepted) ++successes;
      // Success accounting: k <= 3/2 |S| + 1/2 log2(Delta0 / Delta).
      const double k = static_cast<double>(r.k + 1);
      CHECK(k <= 1.5 * successes + 0.5 * std::log2(c.delta0 / r.delta_after) + 1e-9);

      if (norm(ev.xi) > 0) {
        const DenseVector hx = probe.hvp(ev.before.x, ev.xi);
        lg_est = std::max(lg_est, std::abs(dot(ev.xi, hx)) / dot(ev.xi, ev.xi));
      }
      if (r.accepted) {
        const double gxi = norm(ev.before.g_current) * norm(ev.xi);
        const double bound = c.rho_prime * r.model_decrease - gxi - 0.5 * lg_est * dot(ev.xi, ev.xi);
        CHECK(r.f_value - r.f_trial >= bound - 1e-12);
        ++checked_decrease;
      }
    };
    const RunReport rep = tr_run(o, DenseVector(60), c, obs);
    CHECK(rep.totals.n_hvp == rep.records.back().hvp_cum);
    CHECK(rep.totals.n_f == rep.records.size() + 1);
    CHECK(checked_decrease > 0);
  }
}

TEST_CASE("radius stays above the theory floor") {
  ProblemInstance p = make_sine_saddle(40, 6);
  TrustRegionConfig c;
  c.max_outer = 100;
  ObjectiveOracle o = p.oracle;
  const RunReport rep = tr_run(o, DenseVector(40), c);
  const TheoryBounds tb = compute_theory_bounds(p.constants, c, rep.records.front().f_value, 0.1,
                                                1e-8, 40);
  for (const auto& r : rep.records) CHECK(r.delta_after >= 8 * tb.R_bar * (1 - 1e-12));
}

TEST_CASE("oracle faults carry the iteration index") {
  int calls = 0;
  ObjectiveOracle flaky(
      2,
      [&calls](const DenseVector& x) {
        return ++calls > 3 ? std::numeric_limits<double>::quiet_NaN() : 0.5 * dot(x, x);
      },
      [](const DenseVector& x) { return x; },
      // Curvature overstated so no step lands exactly on the minimizer.
      [](const DenseVector&, const DenseVector& u) { return scaled(2.0, u); });
  TrustRegionConfig c;
  c.sigma = 0.0;
  c.max_outer = 10;
  try {
    tr_run(flaky, DenseVector{1, 1}, c);
    FAIL("expected a fault");
  } catch (const RunFault& e) {
    CHECK(e.iteration() == 2);
  }
}

TEST_CASE("theory bounds arithmetic") {
  ProblemConstants k;
  k.f_low = 0.0;
  k.L_G = 1.0;
  k.L_H = 1.0;
  k.mu = 1.0;
  k.gamma_s = 0.1;
  TrustRegionConfig c;
  c.rho_prime = 0.1;
  const TheoryBounds tb = compute_theory_bounds(k, c, 1.0, 0.1, 1e-6, 10);
  CHECK(tb.delta_crit == doctest::Approx(0.09));
  CHECK(tb.R_bar <= c.delta0 / 8);
  CHECK(tb.G_bar == doctest::Approx(tb.R_bar / 2));
  CHECK(tb.F_lg == doctest::Approx(0.1 * tb.G_bar * tb.G_bar / 5));
  CHECK(std::isfinite(tb.K_esc));

  TrustRegionConfig det = c;
  det.sigma = 0.0;
  CHECK(std::isinf(compute_theory_bounds(k, det, 1.0, 0.1, 1e-6, 10).K_esc));

  ProblemConstants missing = k;
  missing.L_H.reset();
  try {
    compute_theory_bounds(missing, c, 1.0, 0.1, 1e-6, 10);
    FAIL("expected MissingConstant");
  } catch (const MissingConstant& e) {
    CHECK(e.field() == "L_H");
  }

  double prev = std::numeric_limits<double>::infinity();
  for (double eps : {1e-10, 1e-8, 1e-6, 1e-4, 1e-2}) {
    const double km = compute_theory_bounds(k, c, 1.0, 0.1, eps, 10).K_M_eps;
    CHECK(km <= prev);
    prev = km;
  }
  CHECK(eps_criticality_bound(4, 1e-2, 0, 0.1, 1, 0.1) ==
        doctest::Approx(768 * 4 * 1e-2 / (0.1 * 0.9 * 0.01) + 0.5 * std::log2(32 * 4 / (0.9 * 0.1))));
  CHECK(quadratic_convergence_radius(1, 1, 1, 1) == doctest::Approx(0.125));
}

TEST_CASE("mu for the factorization landscape") {
  CHECK(mu_for_factorization({3, 2, 1}) == doctest::Approx(1.0));
  CHECK(mu_for_factorization({2, 1, -1}) == doctest::Approx(1.0));
  CHECK(mu_for_factorization({4, 1, 0.5}) == doctest::Approx(0.5));
  CHECK(mu_for_factorization({10, 9.5, 3}) == doctest::Approx(0.5));
  CHECK_THROWS_AS(mu_for_factorization({2, 2, 1}), DegenerateError);
  CHECK_THROWS_AS(mu_for_factorization({1, 2}), ArgumentError);
  CHECK_THROWS_AS(mu_for_factorization({-1, -2}), ArgumentError);
}

TEST_CASE("sampler statistics") {
  CHECK(pr::ks_abs_projection(10, 100000, 2024) <= 0.01);
  for (double delta : {0.1, 0.5}) {
    for (double offset : {0.0, 0.3}) {
      const auto c = pr::concentration_of_perturbation(10, 20000, delta, offset, 55);
      CHECK_MESSAGE(c.ok, "delta " << delta << " offset " << offset << " freq " << c.frequency);
    }
  }
}
