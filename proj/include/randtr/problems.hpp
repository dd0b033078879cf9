#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "randtr/oracle.hpp"
#include "randtr/rng.hpp"

namespace randtr {

/// RNG stream ids for instance generation and initial points.
inline constexpr std::uint64_t kProblemStream = 2;
inline constexpr std::uint64_t kInitStream = 3;

/// Sparse matrix in coordinate triplet form.
struct SparseCoo {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_index;
  std::vector<std::size_t> col_index;
  std::vector<double> value;

  std::size_t nnz() const noexcept { return value.size(); }
  void push(std::size_t i, std::size_t j, double v);
  double frobenius_sq() const noexcept;
  /// Y (rows x k) = A X for row-major X (cols x k).
  std::vector<double> times(const std::vector<double>& x, std::size_t k) const;
  /// Y (cols x k) = A^T X for row-major X (rows x k).
  std::vector<double> transpose_times(const std::vector<double>& x, std::size_t k) const;
};

/// Each entry independently nonzero with probability `density`, value U[0,1].
SparseCoo random_sparse(std::size_t rows, std::size_t cols, double density, CounterRng& rng);
/// Symmetric version: the upper triangle is sampled and mirrored.
SparseCoo random_sparse_symmetric(std::size_t n, double density, CounterRng& rng);

struct ProblemInstance {
  std::string name;
  std::map<std::string, std::string> params;
  std::uint64_t seed = 0;
  ObjectiveOracle oracle;
  ProblemConstants constants;
  std::optional<double> known_minimum_value;
  std::optional<DenseVector> known_saddle;
  std::vector<DenseVector> known_minimizers;
};

/// f(x) = -w1 + sum_i w_i sin(x_i)^2 with w1 = -1e-2, w_2..w_d ~ U[1,2].
ProblemInstance make_sine_saddle(std::size_t d, std::uint64_t seed);

/// f(x) = 1/4 ||x x^T - M||_F^2 where M has the given spectrum (distinct,
/// any order) in a random orthonormal basis.
ProblemInstance make_rank_one_factorization(const std::vector<double>& eigenvalues,
                                            std::uint64_t seed);
/// Same objective with an explicit dense symmetric M (row-major d x d).
ProblemInstance make_rank_one_factorization_from(std::size_t d, std::vector<double> matrix);

/// f(L, R) = 1/2 ||L R^T - A||_F^2 + lambda/2 (||L||^2 + ||R||^2) over
/// x = (L row-major m x r, R row-major n x r).
ProblemInstance make_rect_matrix_approx(std::size_t m, std::size_t n, std::size_t r,
                                        double lambda, double density, std::uint64_t seed);
ProblemInstance make_rect_matrix_approx_from(SparseCoo a, std::size_t r, double lambda);

/// f(X) = 1/4 ||X X^T - A||_F^2 over X row-major n x r, A symmetric sparse.
ProblemInstance make_psd_matrix_approx(std::size_t n, std::size_t r, double density,
                                       std::uint64_t seed);
ProblemInstance make_psd_matrix_approx_from(SparseCoo a, std::size_t r);

/// f(x) = cos(x_d) - 1 + 1/2 sum_{i<d} x_i^2.
ProblemInstance make_worst_case_cosine(std::size_t d);

/// Particles x_1..x_n in R^d (stored column after column) with pairwise
/// attraction -1/(2 beta n^2) sum_ij exp(beta <x_i, x_j>) and the sphere
/// constraint replaced by the penalty (P/2) sum_i (||x_i||^2 - 1)^2.
ProblemInstance make_nonlinear_synchronization(std::size_t d, std::size_t n, double beta,
                                               std::uint64_t seed, double penalty = 10.0);

/// center + radius * (uniform unit vector), drawn from the init stream of `seed`.
DenseVector near_point(const DenseVector& center, double radius, std::uint64_t seed);

/// Standard normal point from the init stream of `seed`, scaled by `scale`.
DenseVector random_point(std::size_t d, double scale, std::uint64_t seed);

/// Fixed-step gradient descent; used to bring the synchronization problem
/// near a saddle before the trust-region runs.
DenseVector gradient_descent(ObjectiveOracle& oracle, DenseVector x, double step,
                             std::size_t iterations);

}  // namespace randtr
