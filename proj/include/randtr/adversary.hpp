#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "randtr/problems.hpp"
#include "randtr/trust_region.hpp"

namespace randtr {

struct OracleAnswer {
  double f = 0.0;
  DenseVector grad;
  DenseVector hvp;
};

/// Every (x, u) query and the answer it received.
struct QueryLog {
  std::vector<DenseVector> xs;
  std::vector<DenseVector> us;
  std::vector<OracleAnswer> answers;

  std::size_t size() const noexcept { return xs.size(); }
};

/// Answers (1/2 ||x||^2, x, u) and appends the exchange to `log`.
OracleAnswer resisting_oracle_answer(const DenseVector& x, const DenseVector& u, QueryLog& log);

/// Orthonormal basis grown by modified Gram-Schmidt with one
/// re-orthogonalization pass. A vector whose residual after projection is
/// at most `tol` times its norm does not enlarge the basis.
class SpanTracker {
 public:
  explicit SpanTracker(std::size_t dim, double tol = 1e-12) : dim_(dim), tol_(tol) {}
  /// Returns true if v enlarged the basis.
  bool add(const DenseVector& v);
  /// v minus its projection onto the current span.
  DenseVector residual(const DenseVector& v) const;
  const std::vector<DenseVector>& basis() const noexcept { return basis_; }
  std::size_t rank() const noexcept { return basis_.size(); }
  std::size_t dim() const noexcept { return dim_; }

 private:
  std::size_t dim_;
  double tol_;
  std::vector<DenseVector> basis_;
};

struct RevealedFunction {
  /// f(x) = 1/2 ||x - <q,x> q||^2 + cos(<q,x>) - 1, a rotated worst-case cosine.
  ProblemInstance instance;
  DenseVector q;
  std::vector<DenseVector> span_basis;
};

/// Picks a unit q orthogonal to every logged x and u (first standard basis
/// vector with a nondegenerate residual) and builds the hidden function.
/// Throws DegenerateError when the queries span the whole space.
RevealedFunction reveal_hidden_function(const QueryLog& log, std::size_t d);

/// Max absolute deviation between logged answers and the revealed function
/// replayed at the logged queries.
double replay_error(const QueryLog& log, ObjectiveOracle& revealed);

/// A deterministic second-order algorithm: it may only call `query`, and
/// each call is one oracle access. It should return when done; the driver
/// aborts it once the budget is spent.
using QueryFn = std::function<OracleAnswer(const DenseVector& x, const DenseVector& u)>;
using DeterministicSolver = std::function<void(const QueryFn& query)>;

/// Trust region with sigma = 0 and classic tCG, fed through `query`. f and
/// grad at the same point share one query (u = 0); each HVP is a query.
DeterministicSolver make_tr_query_solver(std::size_t d, DenseVector x0,
                                         TrustRegionConfig config = {});

struct EscapeRun {
  std::uint64_t seed = 0;
  bool escaped = false;
  /// Outer iterations completed when f first dropped below the threshold.
  std::size_t iterations = 0;
  double best_f = 0.0;
};

struct AdversaryOptions {
  std::size_t escape_seeds = 100;
  std::uint64_t first_seed = 0;
  double escape_threshold = -0.5;
  TrustRegionConfig randomized;  // sigma = 1e-6, TCG_BG by default
  AdversaryOptions() { randomized.max_outer = 100; }
};

struct AdversaryReport {
  std::size_t K = 0;
  std::size_t d = 0;
  QueryLog log;
  bool truncated = false;
  /// min over queried points of the revealed f (>= 0 by construction).
  double min_queried_f = 0.0;
  double replay_error = 0.0;
  double revealed_min_value = -2.0;
  double minimizer_norm = 0.0;
  std::size_t span_rank = 0;
  std::vector<EscapeRun> escapes;

  std::size_t escaped_count() const;
};

/// Runs `solver` against the resisting oracle for at most K queries,
/// reveals f and then measures randomized escape on it from the origin.
AdversaryReport run_adversary_experiment(const DeterministicSolver& solver, std::size_t K,
                                         std::size_t d, const AdversaryOptions& options = {});

}  // namespace randtr
