#include <cmath>
#include <numbers>

#include "doctest.h"
#include "randtr/problems.hpp"
#include "randtr/trust_region.hpp"
#include "support.hpp"

using namespace randtr;
namespace pr = randtr::props;

namespace {

std::vector<ProblemInstance> small_suite() {
  std::vector<ProblemInstance> out;
  out.push_back(make_sine_saddle(20, 1));
  out.push_back(make_rank_one_factorization({4, 1, 0.5, -0.7}, 2));
  out.push_back(make_rect_matrix_approx(7, 9, 2, 0.1, 0.5, 3));
  out.push_back(make_psd_matrix_approx(8, 3, 0.5, 4));
  out.push_back(make_worst_case_cosine(6));
  out.push_back(make_nonlinear_synchronization(3, 6, 2.0, 5));
  return out;
}

double sync_scale(const ProblemInstance& p) { return p.name == "nonlinear_synchronization" ? 0.6 : 1.0; }

}  // namespace

TEST_CASE("every problem passes finite-difference validation") {
  for (auto& p : small_suite()) {
    CAPTURE(p.name);
    for (std::uint64_t s = 0; s < 10; ++s) {
      const DenseVector x = random_point(p.oracle.dim(), sync_scale(p), 100 + s);
      const auto rep = validate_oracle(p.oracle, x, 5, 1e-5, s);
      CHECK(rep.max_grad_rel_err <= 1e-5);
      CHECK(rep.max_hvp_rel_err <= 1e-5);
    }
  }
}

TEST_CASE("hessian-vector products are linear and symmetric") {
  CounterRng rng(12);
  for (auto& p : small_suite()) {
    CAPTURE(p.name);
    const std::size_t d = p.oracle.dim();
    for (std::uint64_t s = 0; s < 10; ++s) {
      const DenseVector x = random_point(d, sync_scale(p), 200 + s);
      const DenseVector u = sample_gaussian(d, rng), v = sample_gaussian(d, rng);
      const DenseVector hu = p.oracle.hvp(x, u), hv = p.oracle.hvp(x, v);
      const double a = 0.7, b = -1.3;
      const DenseVector lhs = p.oracle.hvp(x, axpy(a, u, scaled(b, v)));
      const DenseVector rhs = axpy(a, hu, scaled(b, hv));
      const double scale = std::max(1.0, norm(hu) + norm(hv));
      CHECK(testsupport::max_abs_diff(lhs, rhs) <= 1e-10 * scale);
      CHECK(std::abs(dot(u, hv) - dot(v, hu)) <= 1e-10 * scale * norm(u) * norm(v));
    }
  }
}

TEST_CASE("known saddles are strict saddles") {
  CounterRng rng(2);
  for (auto& p : small_suite()) {
    if (!p.known_saddle) continue;
    CAPTURE(p.name);
    const DenseVector& s = *p.known_saddle;
    CHECK(norm(p.oracle.gradient(s)) <= 1e-10);
    const auto spec = pr::eigen_of(pr::dense_hessian(p.oracle, s));
    CHECK(spec.values(0) < 0.0);
  }
}

TEST_CASE("sine saddle values") {
  ProblemInstance p = make_sine_saddle(50, 9);
  const DenseVector zero(50);
  CHECK(p.oracle.value(zero) == doctest::Approx(1e-2));
  CHECK(norm(p.oracle.gradient(zero)) == 0.0);
  DenseVector x(50);
  x[0] = std::numbers::pi / 2;
  CHECK(std::abs(p.oracle.value(x)) <= 1e-15);
  CHECK(*p.constants.mu == doctest::Approx(2e-2));
  CHECK(*p.constants.L_G <= 4.0);
  CHECK(*p.constants.L_H <= 8.0);
  CHECK(*p.known_minimum_value == 0.0);

  // A solver fixed point satisfies |sin 2x_i| small coordinatewise.
  TrustRegionConfig c;
  c.grad_tol = 1e-10;
  c.max_outer = 200;
  const RunReport rep = tr_run(p.oracle, random_point(50, 0.3, 1), c);
  REQUIRE(rep.terminated_by == Termination::GRAD_TOL);
  for (double xi : rep.x_final) CHECK(std::abs(std::sin(2 * xi)) <= 1e-8);
}

TEST_CASE("rank-one factorization values and critical points") {
  ProblemInstance p = make_rank_one_factorization({4, 1, 0.5}, 3);
  CHECK(*p.known_minimum_value == doctest::Approx(0.3125));
  CHECK(*p.constants.mu == doctest::Approx(0.5));
  for (const auto& m : p.known_minimizers) {
    CHECK(p.oracle.value(m) == doctest::Approx(0.3125).epsilon(1e-12));
    CHECK(norm(p.oracle.gradient(m)) <= 1e-12);
  }
  CHECK_THROWS_AS(make_rank_one_factorization({1, 1, 0.5}, 0), DegenerateError);

  // With M diagonal the critical points are 0 and +-sqrt(lambda_i) e_i.
  ProblemInstance diag = make_rank_one_factorization_from(3, {4, 0, 0, 0, 1, 0, 0, 0, 0.5});
  const double lam[] = {4, 1, 0.5};
  for (std::size_t i = 0; i < 3; ++i) {
    const DenseVector c = scaled(std::sqrt(lam[i]), DenseVector::unit(3, i));
    CHECK(norm(diag.oracle.gradient(c)) <= 1e-14);
    CHECK(norm(diag.oracle.gradient(-c)) <= 1e-14);
  }
  CHECK(norm(diag.oracle.gradient(DenseVector(3))) == 0.0);

  // A converged run lands on a value no lower than the global minimum.
  TrustRegionConfig c;
  c.grad_tol = 1e-10;
  c.max_outer = 200;
  const RunReport rep = tr_run(p.oracle, near_point(DenseVector(3), 1e-3, 1), c);
  CHECK(rep.final_f >= *p.known_minimum_value - 1e-12);
  CHECK(rep.final_f == doctest::Approx(0.3125).epsilon(1e-9));
}

TEST_CASE("rectangular approximation at the origin") {
  SparseCoo a;
  a.rows = 3;
  a.cols = 4;
  a.push(0, 1, 2.0);
  a.push(2, 3, -1.0);
  a.push(1, 0, 0.5);
  const double lambda = 0.3;
  ProblemInstance p = make_rect_matrix_approx_from(a, 2, lambda);
  const std::size_t dim = (3 + 4) * 2;
  REQUIRE(p.oracle.dim() == dim);
  const DenseVector zero(dim);
  CHECK(p.oracle.value(zero) == doctest::Approx(0.5 * a.frobenius_sq()));
  CHECK(norm(p.oracle.gradient(zero)) == 0.0);

  // At L = R = 0: H (dL, dR) = (lambda dL - A dR, lambda dR - A^T dL).
  CounterRng rng(5);
  const DenseVector u = sample_gaussian(dim, rng);
  const DenseVector hu = p.oracle.hvp(zero, u);
  std::vector<double> dl(u.raw().begin(), u.raw().begin() + 6);
  std::vector<double> dr(u.raw().begin() + 6, u.raw().end());
  const auto adr = a.times(dr, 2);
  const auto atdl = a.transpose_times(dl, 2);
  for (std::size_t i = 0; i < 6; ++i) CHECK(hu[i] == doctest::Approx(lambda * dl[i] - adr[i]));
  for (std::size_t i = 0; i < 8; ++i) CHECK(hu[6 + i] == doctest::Approx(lambda * dr[i] - atdl[i]));
}

TEST_CASE("psd approximation matches rank-one when r = 1") {
  CounterRng rng(7);
  const pr::Mat m = pr::with_spectrum({3, 1.5, 0.2, -0.4, -1}, rng);
  std::vector<double> dense(25);
  SparseCoo a;
  a.rows = a.cols = 5;
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      const double v = 0.5 * (m(i, j) + m(j, i));
      dense[i * 5 + j] = v;
      a.push(i, j, v);
    }
  }
  ProblemInstance psd = make_psd_matrix_approx_from(a, 1);
  ProblemInstance r1 = make_rank_one_factorization_from(5, dense);
  CHECK(psd.oracle.value(DenseVector(5)) == doctest::Approx(0.25 * a.frobenius_sq()));
  for (std::uint64_t s = 0; s < 20; ++s) {
    const DenseVector x = random_point(5, 1.0, s);
    const double fa = psd.oracle.value(x), fb = r1.oracle.value(x);
    CHECK(std::abs(fa - fb) <= 1e-12 * std::max(1.0, std::abs(fb)));
    const DenseVector u = sample_gaussian(5, rng);
    CHECK(testsupport::max_abs_diff(psd.oracle.hvp(x, u), r1.oracle.hvp(x, u)) <= 1e-11);
  }

  // Exact fit: A = X X^T.
  const std::vector<double> xs{1, 0, 0, 2, 1, 1};  // 3 x 2
  SparseCoo exact;
  exact.rows = exact.cols = 3;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      exact.push(i, j, xs[2 * i] * xs[2 * j] + xs[2 * i + 1] * xs[2 * j + 1]);
    }
  }
  ProblemInstance fit = make_psd_matrix_approx_from(exact, 2);
  CHECK(fit.oracle.value(DenseVector(std::vector<double>(xs))) == doctest::Approx(0.0));
}

TEST_CASE("worst-case cosine") {
  ProblemInstance p = make_worst_case_cosine(5);
  CHECK(p.oracle.value(DenseVector(5)) == 0.0);
  for (const auto& m : p.known_minimizers) {
    CHECK(p.oracle.value(m) == doctest::Approx(-2.0));
    CHECK(norm(m) == doctest::Approx(std::numbers::pi));
  }
  const pr::Mat h = pr::dense_hessian(p.oracle, DenseVector(5));
  CHECK((h - testsupport::diag({1, 1, 1, 1, -1})).norm() == 0.0);
  CHECK(*p.constants.R_s == 0.25);
  CHECK(*p.constants.gamma_s == doctest::Approx(1 / (2 * std::numbers::pi)));

  // Strong gradient: away from critical points by R_s, ||g|| >= gamma_s.
  for (std::uint64_t s = 0; s < 200; ++s) {
    const DenseVector x = random_point(5, 2.0, s);
    const double t = x[4];
    const double k = std::round(t / std::numbers::pi);
    DenseVector c(5);
    c[4] = k * std::numbers::pi;
    if (norm(x - c) < 0.25) continue;
    CHECK(norm(p.oracle.gradient(x)) >= *p.constants.gamma_s);
  }
}

TEST_CASE("nonlinear synchronization") {
  const double beta = 6.0;
  ProblemInstance p = make_nonlinear_synchronization(3, 10, beta, 0);
  DenseVector sync(30);
  for (std::size_t i = 0; i < 10; ++i) sync[3 * i + 1] = 1.0;
  CHECK(p.oracle.value(sync) == doctest::Approx(-std::exp(beta) / (2 * beta)).epsilon(1e-12));

  // The penalty gradient vanishes on the product of spheres.
  ProblemInstance free = make_nonlinear_synchronization(3, 10, beta, 0, 0.0);
  DenseVector x = random_point(30, 1.0, 4);
  for (std::size_t i = 0; i < 10; ++i) {
    double s = 0;
    for (std::size_t c = 0; c < 3; ++c) s += x[3 * i + c] * x[3 * i + c];
    for (std::size_t c = 0; c < 3; ++c) x[3 * i + c] /= std::sqrt(s);
  }
  CHECK(testsupport::max_abs_diff(p.oracle.gradient(x), free.oracle.gradient(x)) <= 1e-14);
}

TEST_CASE("initial points are reproducible") {
  CHECK(random_point(10, 1.0, 3) == random_point(10, 1.0, 3));
  CHECK_FALSE(random_point(10, 1.0, 3) == random_point(10, 1.0, 4));
  const DenseVector c{1, 2, 3};
  CHECK(norm(near_point(c, 0.01, 5) - c) == doctest::Approx(0.01));
}
