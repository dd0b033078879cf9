#include <cmath>

#include "doctest.h"
#include "randtr/subproblem.hpp"
#include "support.hpp"

using namespace randtr;
namespace pr = randtr::props;
using testsupport::diag;

namespace {

QuadraticModel model_of(const pr::Mat& h, const DenseVector& g) { return pr::model_from(h, g); }

SubproblemOptions traced() {
  SubproblemOptions o;
  o.trace = TraceMode::On;
  return o;
}

}  // namespace

TEST_CASE("boundary gradient step, closed-form cases") {
  SUBCASE("interior minimizer along the residual") {
    const auto m = model_of(diag({1, 1}), DenseVector{-1, 0});
    const auto b = boundary_gradient_step(m, 10.0, DenseVector(2));
    CHECK(b.u == DenseVector{1, 0});
    CHECK(b.s == doctest::Approx(1.0));
    CHECK_FALSE(b.used_boundary);
    CHECK(b.model_decrease == doctest::Approx(0.5));
  }
  SUBCASE("negative curvature runs to the sphere") {
    const auto m = model_of(diag({-1, 1}), DenseVector{0, 0});
    const DenseVector v{1, 0};
    const auto b = boundary_gradient_step(m, 4.0, v);
    CHECK(b.curvature == doctest::Approx(-1.0));
    CHECK(b.used_boundary);
    CHECK(testsupport::max_abs_diff(b.u, DenseVector{4, 0}) < 1e-12);
    CHECK(b.model_decrease == doctest::Approx(7.5));
    CHECK(b.model_decrease >= 4.0 / 4.0 * 1.0);
  }
  SUBCASE("zero residual is a fixed point") {
    const auto m = model_of(diag({1, 1}), DenseVector{0, 0});
    const auto b = boundary_gradient_step(m, 1.0, DenseVector(2));
    CHECK(b.u == DenseVector(2));
    CHECK_FALSE(b.used_boundary);
    CHECK(b.model_decrease == 0.0);
  }
  SUBCASE("a supplied residual costs exactly one product") {
    const auto m = model_of(diag({2, 3}), DenseVector{1, 1});
    const DenseVector v{0.1, 0};
    const DenseVector r = m.residual(v);
    CHECK(boundary_gradient_step(m, 1.0, v, &r).hvp_count == 1);
  }
  SUBCASE("start outside the ball") {
    const auto m = model_of(diag({1, 1}), DenseVector{1, 0});
    CHECK_THROWS_AS(boundary_gradient_step(m, 1.0, DenseVector{2, 0}), ArgumentError);
  }
}

TEST_CASE("tcg_bg closed-form cases") {
  SUBCASE("convex diagonal model converges to the minimizer") {
    const DenseVector g{-2, -4};
    const auto m = model_of(diag({2, 4}), g);
    const auto res = tcg_bg(m, 100.0, DenseVector(2));
    CHECK(res.stop_reason == StopReason::RES);
    CHECK(res.iterations <= 2);
    CHECK(norm(m.residual(res.step)) <= std::min(0.1 * norm(g), norm(g) * norm(g)));
    CHECK(testsupport::max_abs_diff(res.step, DenseVector{1, 1}) < 1e-10);
  }
  SUBCASE("one-dimensional negative curvature") {
    const auto m = model_of(diag({-1}), DenseVector{0.1});
    const auto res = tcg_bg(m, 2.0, DenseVector(1), traced());
    CHECK(res.stop_reason == StopReason::OOB);
    CHECK(res.iterations == 1);
    REQUIRE(res.trace);
    CHECK(res.trace->iterates.back()[0] == doctest::Approx(-1.0));
    CHECK(std::abs(res.step[0]) <= 2.0 + 1e-12);
    REQUIRE(res.boundary);
  }
  SUBCASE("zero gradient at zero stays put") {
    const auto m = model_of(diag({-1, 1}), DenseVector{0, 0});
    const auto res = tcg_bg(m, 1.0, DenseVector(2));
    CHECK(res.step == DenseVector(2));
    CHECK(res.stop_reason == StopReason::RES);
    CHECK(res.iterations == 0);
    CHECK(res.hvp_count == 0);
  }
  SUBCASE("preconditions") {
    const auto m = model_of(diag({1, 1}), DenseVector{1, 0});
    CHECK_THROWS_AS(tcg_bg(m, 1.0, DenseVector{0.3, 0}), ArgumentError);
    CHECK_THROWS_AS(tcg_bg(m, 0.0, DenseVector(2)), ArgumentError);
    CHECK_THROWS_AS(tcg_bg(m, 1.0, DenseVector(3)), DimensionError);
    SubproblemOptions bad;
    bad.omega1 = 1.5;
    CHECK_THROWS_AS(tcg_bg(m, 1.0, DenseVector(2), bad), ArgumentError);
  }
}

TEST_CASE("tcg_classic closed-form cases") {
  const auto neg = model_of(diag({-1}), DenseVector{0.1});
  const auto res = tcg_classic(neg, 2.0);
  CHECK(res.stop_reason == StopReason::OOB);
  CHECK(res.step[0] == doctest::Approx(-2.0));
  CHECK_FALSE(res.boundary);

  const auto saddle = model_of(diag({-1, 1}), DenseVector{0, 0});
  const auto stuck = tcg_classic(saddle, 1.0);
  CHECK(stuck.step == DenseVector(2));
  CHECK(stuck.iterations == 0);
}

TEST_CASE("classic and bg agree on interior convex models") {
  CounterRng rng(21);
  for (int i = 0; i < 30; ++i) {
    pr::QuadInstance q = pr::random_spd_interior(rng, 12);
    const auto m = pr::model_from(q.h, q.g);
    const auto a = tcg_bg(m, q.delta, DenseVector(q.g.size()), traced());
    const auto b = tcg_classic(m, q.delta, traced());
    REQUIRE(a.stop_reason == StopReason::RES);
    REQUIRE(b.stop_reason == StopReason::RES);
    CHECK(a.iterations == b.iterations);
    for (std::size_t t = 0; t < a.trace->iterates.size(); ++t) {
      CHECK(testsupport::max_abs_diff(a.trace->iterates[t], b.trace->iterates[t]) < 1e-12);
    }
  }
}

TEST_CASE("max_inner truncation is flagged") {
  CounterRng rng(4);
  const pr::Mat h = pr::with_spectrum({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, rng);
  const DenseVector g = sample_gaussian(10, rng);
  SubproblemOptions o;
  o.max_inner = 2;
  o.omega1 = 1e-6;
  o.omega2 = 1e-6;
  const auto res = tcg_bg(pr::model_from(h, g), 1e6, DenseVector(10), o);
  CHECK(res.truncated);
  CHECK(res.iterations == 2);
  CHECK(res.stop_reason == StopReason::RES);
  CHECK(default_max_inner(5) == 50);
  CHECK(default_max_inner(1000000) == 10000);
}

TEST_CASE("cg shift equivalence") {
  CounterRng rng(8);
  const pr::Mat spd = pr::with_spectrum({0.5, 1, 1.5, 2, 3, 4, 6, 9}, rng);
  const DenseVector g = sample_gaussian(8, rng);
  const auto m = pr::model_from(spd, g);
  CHECK(check_cg_shift_equivalence(m, DenseVector(8), 5));
  CHECK(check_cg_shift_equivalence(m, scaled(0.1, sample_unit_sphere(8, rng)), 5));

  for (int i = 0; i < 20; ++i) {
    const pr::Mat ind = pr::with_spectrum({-1.5, -0.3, 0.2, 0.7, 1, 2, 3, 5}, rng);
    const auto mi = pr::model_from(ind, sample_gaussian(8, rng));
    const DenseVector xi = scaled(0.05, sample_unit_sphere(8, rng));
    SubproblemOptions o = traced();
    const auto run = tcg_bg(mi, 1e6, xi, o);
    const std::size_t t_in = run.trace->t_in;
    if (t_in == 0) continue;
    CHECK(check_cg_shift_equivalence(mi, xi, t_in));
  }
}

TEST_CASE("tcg_bg invariants on random instances") {
  CounterRng rng(99);
  for (int i = 0; i < 300; ++i) {
    pr::QuadInstance q = (i % 2 == 0) ? pr::random_mixed(rng, 15) : pr::random_nonconvex(rng, 15);
    const auto m = pr::model_from(q.h, q.g);
    const bool pass_hxi = (i % 3 == 0);
    const DenseVector hxi = pr::from_eigen(q.h * pr::to_eigen(q.xi));
    const auto res = tcg_bg(m, q.delta, q.xi, traced(), pass_hxi ? &hxi : nullptr);
    const std::size_t d = q.g.size();

    CHECK(norm(res.step) <= q.delta * (1 + 1e-9));
    const double m_xi = pr::model_value(q.h, q.g, q.xi);
    const double m_u = pr::model_value(q.h, q.g, res.step);
    CHECK(res.model_decrease >= -1e-12 * std::max(1.0, std::abs(m_xi)));
    CHECK(res.model_decrease == doctest::Approx(m_xi - m_u).epsilon(1e-8).scale(1.0));
    CHECK(res.model_start == doctest::Approx(m_xi).epsilon(1e-10));
    CHECK(res.iterations <= std::min(d, default_max_inner(d)) + 0);

    const auto& tr = *res.trace;
    CHECK((tr.t_in == res.iterations || tr.t_in + 1 == res.iterations));
    for (std::size_t t = 0; t <= tr.t_in && t < tr.iterates.size(); ++t) {
      const DenseVector direct = m.residual(tr.iterates[t]);
      const double scale = std::max(1.0, norm(q.g) + pr::eigen_of(q.h).op_norm * norm(tr.iterates[t]));
      CHECK(testsupport::max_abs_diff(direct, tr.residuals[t]) <= 1e-9 * scale);
    }

    std::size_t expected = res.iterations;
    if (res.boundary) expected += res.boundary->hvp_count;
    if (norm(q.xi) > 0 && !pass_hxi) expected += 1;
    CHECK(res.hvp_count == expected);
  }
}

TEST_CASE("model decrease meets its lower bounds") {
  CounterRng rng(5);
  for (int i = 0; i < 200; ++i) {
    pr::QuadInstance q = pr::random_mixed(rng, 12);
    const auto res = tcg_bg(pr::model_from(q.h, q.g), q.delta, q.xi, traced());
    const auto led = pr::decrease_ledger(q.h, q.g, q.delta, q.xi, res);
    const double slack = 1e-9 * std::max(1.0, std::abs(led.observed));
    CHECK(led.observed + slack >= led.w1);
    CHECK(led.observed + slack >= led.w2);
  }
}

TEST_CASE("divergence and steihaug properties") {
  CounterRng rng(17);
  for (int i = 0; i < 100; ++i) {
    pr::QuadInstance q = pr::random_nonconvex(rng, 12);
    const auto res = tcg_bg(pr::model_from(q.h, q.g), q.delta, q.xi, traced());
    const auto v = pr::check_divergence_law(q.h, q.g, res);
    CHECK_MESSAGE(v.ok, v.detail);
  }
  for (int i = 0; i < 100; ++i) {
    pr::QuadInstance q = pr::random_spd_interior(rng, 12);
    const auto o = traced();
    const auto res = tcg_bg(pr::model_from(q.h, q.g), q.delta, q.xi, o);
    const auto v = pr::check_steihaug(q.h, q.g, q.xi, res, o);
    CHECK_MESSAGE(v.ok, v.detail);
  }
}

TEST_CASE("out-of-ball decrease floor under a spectral band") {
  CounterRng rng(31);
  const double nu = 0.2, lg = 3.0;
  std::size_t oob = 0;
  for (int i = 0; i < 200; ++i) {
    pr::QuadInstance q = pr::random_banded(rng, nu, lg, 12);
    const auto res = tcg_bg(pr::model_from(q.h, q.g), q.delta, q.xi);
    if (res.stop_reason != StopReason::OOB) continue;
    ++oob;
    CHECK(res.model_decrease >= pr::oob_decrease_floor(nu, lg, q.delta) * (1 - 1e-9));
  }
  CHECK(oob > 20);
}

TEST_CASE("property suites") {
  for (const auto& s : pr::run_property_suites(10, 123)) {
    CHECK_MESSAGE(s.ok, s.name << ": " << s.detail);
  }
}
