#pragma once

// Dense reference oracles and property checkers shared by the unit tests,
// the acceptance binary and `randtr selftest`. Everything here is built on
// Eigen and written independently of the matrix-free solver code.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "randtr/oracle.hpp"
#include "randtr/rng.hpp"
#include "randtr/subproblem.hpp"

namespace randtr::props {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

Vec to_eigen(const DenseVector& v);
DenseVector from_eigen(const Vec& v);

/// H assembled column by column from HVPs on a private copy of `oracle`,
/// then symmetrized.
Mat dense_hessian(const ObjectiveOracle& oracle, const DenseVector& x);

QuadraticModel model_from(const Mat& h, const DenseVector& g);
double model_value(const Mat& h, const DenseVector& g, const DenseVector& v);

struct Spectrum {
  Vec values;   // ascending
  Mat vectors;  // columns
  double op_norm = 0.0;
};
Spectrum eigen_of(const Mat& h);

/// Haar-ish orthogonal matrix from the QR factors of a Gaussian matrix.
Mat random_orthogonal(std::size_t d, CounterRng& rng);
Mat with_spectrum(const std::vector<double>& eig, CounterRng& rng);

/// A tcg_bg input drawn at random.
struct QuadInstance {
  Mat h;
  DenseVector g;
  DenseVector xi;
  double delta = 1.0;
};

/// Indefinite H with smallest eigenvalue in [-2, -0.1] and the rest of the
/// spectrum in +-[0.1, 2]; xi on the Delta/4 sphere.
QuadInstance random_nonconvex(CounterRng& rng, std::size_t max_dim = 50);
/// SPD (eigenvalues in [0.05, 5]) or indefinite, with Delta spread over
/// several decades so both stopping rules occur.
QuadInstance random_mixed(CounterRng& rng, std::size_t max_dim = 50);
/// |eigenvalues| in [nu, L] with random signs; xi oriented so <H xi, g> >= 0.
QuadInstance random_banded(CounterRng& rng, double nu, double lg, std::size_t max_dim = 50);
/// SPD with ||H^-1 g|| < Delta/4 and ||xi|| <= Delta/8.
QuadInstance random_spd_interior(CounterRng& rng, std::size_t max_dim = 50);

/// Plain CG from x0 on H v = -g, written from the textbook recurrences.
/// Stops when ||r|| <= tol or after max_steps steps.
std::vector<Vec> reference_cg(const Mat& h, const Vec& g, const Vec& x0, std::size_t max_steps,
                              double tol);

struct Verdict {
  bool ok = true;
  std::size_t checked = 0;
  std::string detail;
  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
};

/// Growth of <v_t - vbar, q> along every negative eigenvector, t <= t_in.
/// Needs a trace.
Verdict check_divergence_law(const Mat& h, const DenseVector& g, const SubproblemResult& res,
                             double slack = 1e-9);

struct DecreaseLedger {
  double observed = 0.0;  // m(xi) - m(u) recomputed densely
  double w1 = 0.0;
  double w2 = 0.0;
};
DecreaseLedger decrease_ledger(const Mat& h, const DenseVector& g, double delta,
                               const DenseVector& xi, const SubproblemResult& res);
double oob_decrease_floor(double nu, double lg, double delta);

/// RES termination, iterates equal to reference_cg (entrywise relative tol)
/// and nondecreasing distances of the tentative iterates from v^(0), capped
/// by ||v* - v^(0)||. Needs a trace.
Verdict check_steihaug(const Mat& h, const DenseVector& g, const DenseVector& xi,
                       const SubproblemResult& res, const SubproblemOptions& options,
                       double tol = 1e-9);

/// Inner-iteration caps. All return +Inf when the formula is vacuous.
double convex_inner_cap(double lg, double nu, double g_norm, double r0_norm, double omega1,
                        double omega2);
double negative_curvature_inner_cap(double lg, double lambda_min, double r0_norm,
                                    double r0_along_qmin);
double large_gradient_inner_cap(double lg, double delta, double g_norm, double r0_norm,
                                double omega1, double omega2);

/// Running tally of inner-iteration cap checks.
struct InnerAudit {
  std::size_t checked = 0;
  std::size_t violations = 0;
  std::string first_violation;

  void record(bool ok, const std::string& what);
  /// Every applicable cap for one call, with constants from the dense H.
  void audit_dense(const Mat& h, const DenseVector& g, double delta, const DenseVector& xi,
                   std::size_t iterations, double omega1, double omega2);
  /// Large-gradient cap only, with a known bound L on ||H||.
  void audit_cap(double lg, double delta, double g_norm, double r0_norm, std::size_t iterations,
                 double omega1, double omega2);
};

/// KS distance between |<q, xi_bar>| over n uniform unit vectors in R^d and
/// its exact law (a regularized incomplete beta in t^2).
double ks_abs_projection(std::size_t d, std::size_t n, std::uint64_t seed);

struct ConcentrationCheck {
  double delta = 0.0;
  double offset = 0.0;
  double frequency = 0.0;
  double standard_error = 0.0;
  bool ok = false;
};
/// Frequency of |<z, xi> + c| < delta ||z|| ||xi|| sqrt(pi / 8d) over n
/// perturbations produced by the solver's sampler on a fixed quadratic.
ConcentrationCheck concentration_of_perturbation(std::size_t d, std::size_t n, double delta,
                                                 double offset, std::uint64_t seed);

struct SuiteResult {
  std::string name;
  bool ok = false;
  std::string detail;
};
/// Small-dimension versions of all subproblem and sampler properties.
std::vector<SuiteResult> run_property_suites(std::size_t max_dim = 20, std::uint64_t seed = 7);

}  // namespace randtr::props
