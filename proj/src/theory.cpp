#include "randtr/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace randtr {

namespace {

double need(const std::optional<double>& v, const char* field) {
  if (!v) throw MissingConstant(field);
  return *v;
}

}  // namespace

double local_phase_bound(double R_bar, double epsilon) {
  if (!(epsilon > 0.0)) throw ArgumentError("local_phase_bound: epsilon must be positive");
  return std::log2(1.0 + std::max(0.0, std::log2(R_bar / epsilon)));
}

double eps_criticality_bound(double L_G, double f0, double f_low, double rho_prime,
                             double delta0, double epsilon) {
  if (!(epsilon > 0.0)) throw ArgumentError("eps_criticality_bound: epsilon must be positive");
  const double q = 1.0 - rho_prime;
  return 768.0 * L_G * (f0 - f_low) / (rho_prime * q * epsilon * epsilon) +
         0.5 * std::log2(32.0 * L_G * delta0 / (q * epsilon));
}

double quadratic_convergence_radius(double mu, double L_G, double L_H, double omega2) {
  if (!(mu > 0.0 && L_G > 0.0 && L_H > 0.0 && omega2 > 0.0)) {
    throw ArgumentError("quadratic_convergence_radius: constants must be positive");
  }
  return std::min(mu * mu / (4.0 * L_H * L_G), mu / (8.0 * omega2 * L_G * L_G));
}

TheoryBounds compute_theory_bounds(const ProblemConstants& constants,
                                   const TrustRegionConfig& config, double f0,
                                   double delta_confidence, double epsilon, std::size_t dim) {
  const double f_low = need(constants.f_low, "f_low");
  const double L_G = need(constants.L_G, "L_G");
  const double L_H = need(constants.L_H, "L_H");
  const double mu = need(constants.mu, "mu");
  const double gamma_s = need(constants.gamma_s, "gamma_s");
  constants.validate();
  if (!(delta_confidence > 0.0 && delta_confidence < 1.0)) {
    throw ArgumentError("delta_confidence must be in (0,1)");
  }
  if (!(epsilon > 0.0)) throw ArgumentError("epsilon must be positive");
  if (dim < 1) throw ArgumentError("dim must be >= 1");
  if (f0 < f_low) throw ArgumentError("f0 is below f_low");

  const double rp = config.rho_prime;
  TheoryBounds b;
  b.delta_crit = (1.0 - rp) * mu * mu / (10.0 * L_H * L_G);
  b.R_bar = std::min({(1.0 - rp) * gamma_s / (256.0 * L_G),
                      mu / (8.0 * config.omega2 * L_G * L_G), b.delta_crit / 32.0,
                      config.delta0 / 8.0});
  b.G_bar = 0.5 * mu * b.R_bar;
  b.F_lg = rp * b.G_bar * b.G_bar / (5.0 * L_G);
  b.sigma_bar = rp * b.G_bar / (5.0 * L_G);
  b.delta_prime = b.F_lg / (f0 - f_low + b.F_lg) * delta_confidence;

  if (config.sigma > 0.0) {
    const double arg = 2.0 + std::sqrt(static_cast<double>(dim)) /
                                 (config.omega2 * mu * b.delta_prime * config.sigma);
    b.K_esc = 2.0 + std::log2(std::log2(arg));
  } else {
    b.K_esc = std::numeric_limits<double>::infinity();
  }
  b.K_GN = 1.5 * ((f0 - f_low) / b.F_lg + 1.0) * b.K_esc +
           0.5 * std::log2(config.delta0 / (8.0 * b.R_bar));
  b.K_M_eps = local_phase_bound(b.R_bar, epsilon);
  b.eps_crit_bound = eps_criticality_bound(L_G, f0, f_low, rp, config.delta0, epsilon);
  b.sigma_small_enough = config.sigma <= b.sigma_bar &&
                         config.sigma * b.K_esc <= rp * mu * mu * b.R_bar / (8.0 * L_G * L_G);
  return b;
}

double mu_for_factorization(const std::vector<double>& eigenvalues) {
  if (eigenvalues.empty()) throw ArgumentError("mu_for_factorization: empty spectrum");
  for (double e : eigenvalues) {
    if (!std::isfinite(e)) throw ArgumentError("mu_for_factorization: non-finite eigenvalue");
  }
  for (std::size_t i = 1; i < eigenvalues.size(); ++i) {
    if (eigenvalues[i] > eigenvalues[i - 1]) {
      throw ArgumentError("mu_for_factorization: eigenvalues must be sorted descending");
    }
    if (eigenvalues[i] == eigenvalues[i - 1]) {
      throw DegenerateError("mu_for_factorization: repeated eigenvalue");
    }
  }
  if (!(eigenvalues.front() > 0.0)) {
    throw ArgumentError("mu_for_factorization: need at least one positive eigenvalue");
  }
  // Inserting 0 into the spectrum turns every term into a consecutive gap.
  std::vector<double> ext;
  ext.reserve(eigenvalues.size() + 1);
  for (double e : eigenvalues) {
    if (e == 0.0) throw DegenerateError("mu_for_factorization: zero eigenvalue");
    if (e < 0.0 && (ext.empty() || ext.back() > 0.0)) ext.push_back(0.0);
    ext.push_back(e);
  }
  if (ext.back() > 0.0) ext.push_back(0.0);
  double mu = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < ext.size(); ++i) mu = std::min(mu, ext[i - 1] - ext[i]);
  return mu;
}

}  // namespace randtr
