#pragma once

#include <cstddef>
#include <vector>

#include "randtr/oracle.hpp"
#include "randtr/trust_region.hpp"

namespace randtr {

/// Constants and iteration bounds from the global convergence analysis.
/// Purely arithmetic; no oracle calls.
struct TheoryBounds {
  double delta_crit = 0.0;
  double R_bar = 0.0;
  double G_bar = 0.0;
  double F_lg = 0.0;
  double sigma_bar = 0.0;
  double delta_prime = 0.0;
  /// Outer iterations spent near one saddle (+Inf when sigma = 0).
  double K_esc = 0.0;
  /// Bound on the capture iteration (entering the R_bar ball of a minimizer).
  double K_GN = 0.0;
  /// Extra iterations to get within epsilon of the minimizer afterwards.
  double K_M_eps = 0.0;
  /// Bound on the first iteration with ||g|| <= epsilon.
  double eps_crit_bound = 0.0;
  /// sigma <= sigma_bar and sigma * K_esc <= rho' mu^2 R_bar / (8 L_G^2).
  bool sigma_small_enough = false;
};

/// Requires f_low, L_G, L_H, mu and gamma_s; throws MissingConstant naming
/// the first absent one. `dim` enters K_esc through sqrt(d).
TheoryBounds compute_theory_bounds(const ProblemConstants& constants,
                                   const TrustRegionConfig& config, double f0,
                                   double delta_confidence, double epsilon, std::size_t dim);

/// log2(1 + max(0, log2(R_bar / epsilon))).
double local_phase_bound(double R_bar, double epsilon);

/// 768 L_G (f0 - f_low) / (rho'(1-rho') eps^2) + 1/2 log2(32 L_G Delta0 / ((1-rho') eps)).
double eps_criticality_bound(double L_G, double f0, double f_low, double rho_prime,
                             double delta0, double epsilon);

/// Largest R with guaranteed quadratic contraction after a successful RES
/// step: min(mu^2 / (4 L_H L_G), mu / (8 omega2 L_G^2)).
double quadratic_convergence_radius(double mu, double L_G, double L_H, double omega2);

/// Morse constant of x -> 1/4 ||x x^T - M||_F^2 from the spectrum of M
/// (distinct, sorted descending, at least one positive, none zero).
double mu_for_factorization(const std::vector<double>& eigenvalues);

}  // namespace randtr
