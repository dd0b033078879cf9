#include "randtr/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>

namespace randtr {

namespace {

struct BudgetSpent {};

// Routes ObjectiveOracle calls to a query function. f and grad at the point of
// the last query are served from that answer.
class QueryBridge {
 public:
  explicit QueryBridge(QueryFn query) : query_(std::move(query)) {}

  const OracleAnswer& at(const DenseVector& x) {
    if (!last_x_ || !(*last_x_ == x)) {
      last_ = query_(x, DenseVector(x.size()));
      last_x_ = x;
    }
    return last_;
  }
  DenseVector hvp(const DenseVector& x, const DenseVector& u) {
    last_ = query_(x, u);
    last_x_ = x;
    return last_.hvp;
  }

 private:
  QueryFn query_;
  std::optional<DenseVector> last_x_;
  OracleAnswer last_;
};

}  // namespace

OracleAnswer resisting_oracle_answer(const DenseVector& x, const DenseVector& u, QueryLog& log) {
  require_same_size(x, u, "resisting_oracle_answer");
  OracleAnswer a{0.5 * dot(x, x), x, u};
  log.xs.push_back(x);
  log.us.push_back(u);
  log.answers.push_back(a);
  return a;
}

DenseVector SpanTracker::residual(const DenseVector& v) const {
  if (v.size() != dim_) throw DimensionError("SpanTracker: vector length");
  DenseVector r = v;
  for (int pass = 0; pass < 2; ++pass) {
    for (const DenseVector& b : basis_) axpy_inplace(-dot(b, r), b, r);
  }
  return r;
}

bool SpanTracker::add(const DenseVector& v) {
  const double n = norm(v);
  if (n == 0.0 || basis_.size() == dim_) return false;
  DenseVector r = residual(v);
  const double rn = norm(r);
  if (rn <= tol_ * n) return false;
  basis_.push_back(scaled(1.0 / rn, r));
  return true;
}

RevealedFunction reveal_hidden_function(const QueryLog& log, std::size_t d) {
  if (d < 1) throw ArgumentError("reveal_hidden_function: d must be >= 1");
  SpanTracker span(d);
  for (std::size_t i = 0; i < log.size(); ++i) {
    span.add(log.xs[i]);
    span.add(log.us[i]);
  }
  if (span.rank() >= d) throw DegenerateError("reveal_hidden_function: queries span R^d");

  std::optional<DenseVector> q;
  for (std::size_t j = 0; j < d && !q; ++j) {
    DenseVector r = span.residual(DenseVector::unit(d, j));
    const double rn = norm(r);
    if (rn > 1e-6) q = scaled(1.0 / rn, r);
  }
  if (!q) throw DegenerateError("reveal_hidden_function: no orthogonal direction found");

  auto qv = std::make_shared<const DenseVector>(*q);
  auto value = [qv](const DenseVector& x) {
    const double t = dot(*qv, x);
    const DenseVector perp = axpy(-t, *qv, x);
    return 0.5 * dot(perp, perp) + std::cos(t) - 1.0;
  };
  auto grad = [qv](const DenseVector& x) {
    const double t = dot(*qv, x);
    // (x - t q) - sin(t) q
    return axpy(-(t + std::sin(t)), *qv, x);
  };
  auto hvp = [qv](const DenseVector& x, const DenseVector& u) {
    const double t = dot(*qv, x);
    const double s = dot(*qv, u);
    return axpy(-(1.0 + std::cos(t)) * s, *qv, u);
  };

  ProblemInstance inst{"revealed_cosine",
                       {{"d", std::to_string(d)}, {"queries", std::to_string(log.size())}},
                       0,
                       ObjectiveOracle(d, value, grad, hvp),
                       {},
                       -2.0,
                       DenseVector(d),
                       {}};
  inst.constants.f_low = -2.0;
  inst.constants.L_G = 1.0;
  inst.constants.L_H = 1.0;
  inst.constants.mu = 1.0;
  inst.constants.R_s = 0.25;
  inst.constants.gamma_s = 1.0 / (2.0 * std::numbers::pi);
  inst.known_minimizers = {scaled(std::numbers::pi, *q), scaled(-std::numbers::pi, *q)};
  return RevealedFunction{std::move(inst), *q, span.basis()};
}

double replay_error(const QueryLog& log, ObjectiveOracle& revealed) {
  double err = 0.0;
  for (std::size_t i = 0; i < log.size(); ++i) {
    const OracleAnswer& a = log.answers[i];
    err = std::max(err, std::abs(revealed.value(log.xs[i]) - a.f));
    err = std::max(err, norm_inf(revealed.gradient(log.xs[i]) - a.grad));
    err = std::max(err, norm_inf(revealed.hvp(log.xs[i], log.us[i]) - a.hvp));
  }
  return err;
}

DeterministicSolver make_tr_query_solver(std::size_t d, DenseVector x0, TrustRegionConfig config) {
  if (x0.size() != d) throw DimensionError("make_tr_query_solver: x0 length");
  config.sigma = 0.0;
  config.solver = SolverKind::TCG_CLASSIC;
  config.validate();
  return [d, x0 = std::move(x0), config](const QueryFn& query) {
    auto bridge = std::make_shared<QueryBridge>(query);
    ObjectiveOracle oracle(
        d, [bridge](const DenseVector& x) { return bridge->at(x).f; },
        [bridge](const DenseVector& x) { return bridge->at(x).grad; },
        [bridge](const DenseVector& x, const DenseVector& u) { return bridge->hvp(x, u); });
    tr_run(oracle, x0, config);
  };
}

std::size_t AdversaryReport::escaped_count() const {
  return static_cast<std::size_t>(
      std::count_if(escapes.begin(), escapes.end(), [](const EscapeRun& e) { return e.escaped; }));
}

AdversaryReport run_adversary_experiment(const DeterministicSolver& solver, std::size_t K,
                                         std::size_t d, const AdversaryOptions& options) {
  if (K < 1) throw ArgumentError("run_adversary_experiment: K must be >= 1");
  if (d < 2 * K + 1) throw ArgumentError("run_adversary_experiment: need d >= 2K + 1");

  AdversaryReport rep;
  rep.K = K;
  rep.d = d;

  const QueryFn query = [&rep, K, d](const DenseVector& x, const DenseVector& u) {
    if (x.size() != d || u.size() != d) throw DimensionError("query: vector length");
    if (rep.log.size() >= K) {
      rep.truncated = true;
      throw BudgetSpent{};
    }
    return resisting_oracle_answer(x, u, rep.log);
  };
  try {
    solver(query);
  } catch (const BudgetSpent&) {
  }

  RevealedFunction rev = reveal_hidden_function(rep.log, d);
  rep.span_rank = rev.span_basis.size();
  ObjectiveOracle& f = rev.instance.oracle;
  rep.min_queried_f = std::numeric_limits<double>::infinity();
  for (const DenseVector& x : rep.log.xs) rep.min_queried_f = std::min(rep.min_queried_f, f.value(x));
  rep.replay_error = replay_error(rep.log, f);
  rep.revealed_min_value = f.value(rev.instance.known_minimizers.front());
  rep.minimizer_norm = norm(rev.instance.known_minimizers.front());

  for (std::size_t s = 0; s < options.escape_seeds; ++s) {
    TrustRegionConfig cfg = options.randomized;
    cfg.seed = options.first_seed + s;
    ObjectiveOracle run_oracle = f;
    EscapeRun er;
    er.seed = cfg.seed;
    er.best_f = 0.0;
    const RunReport report = tr_run(run_oracle, DenseVector(d), cfg, [&](const StepEvent& ev) {
      if (ev.record.accepted) er.best_f = std::min(er.best_f, ev.record.f_trial);
      if (!er.escaped && ev.record.accepted && ev.record.f_trial <= options.escape_threshold) {
        er.escaped = true;
        er.iterations = ev.record.k + 1;
      }
    });
    (void)report;
    rep.escapes.push_back(er);
  }
  return rep;
}

}  // namespace randtr
