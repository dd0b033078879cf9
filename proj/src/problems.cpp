#include "randtr/problems.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <numbers>

#include "randtr/theory.hpp"

namespace randtr {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Row-major dense helpers for tall-skinny factors (rows x k) and k x k Grams.
using Mat = std::vector<double>;

Mat gram(const double* a, const double* b, std::size_t rows, std::size_t k) {
  Mat g(k * k, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    const double* ai = a + i * k;
    const double* bi = b + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      for (std::size_t q = 0; q < k; ++q) g[p * k + q] += ai[p] * bi[q];
    }
  }
  return g;
}

// out += a (rows x k) * s (k x k)
void add_times_small(const double* a, const Mat& s, std::size_t rows, std::size_t k, double* out) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double* ai = a + i * k;
    double* oi = out + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = ai[p];
      if (aip == 0.0) continue;
      for (std::size_t q = 0; q < k; ++q) oi[q] += aip * s[p * k + q];
    }
  }
}

Mat transpose_small(const Mat& s, std::size_t k) {
  Mat t(k * k);
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t q = 0; q < k; ++q) t[q * k + p] = s[p * k + q];
  }
  return t;
}

double frob_inner(const Mat& a, const Mat& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

DenseVector to_dense(Mat v) { return DenseVector(std::move(v)); }

// Orthonormal columns of a d x d Gaussian matrix (modified Gram-Schmidt,
// two passes). Returned column-major: basis[j] is the j-th vector.
std::vector<DenseVector> random_orthonormal(std::size_t d, CounterRng& rng) {
  std::vector<DenseVector> basis;
  while (basis.size() < d) {
    DenseVector v = sample_gaussian(d, rng);
    for (int pass = 0; pass < 2; ++pass) {
      for (const DenseVector& b : basis) axpy_inplace(-dot(b, v), b, v);
    }
    const double n = norm(v);
    if (n < 1e-8) continue;
    basis.push_back(scaled(1.0 / n, v));
  }
  return basis;
}

}  // namespace

void SparseCoo::push(std::size_t i, std::size_t j, double v) {
  if (i >= rows || j >= cols) throw DimensionError("SparseCoo: index out of range");
  row_index.push_back(i);
  col_index.push_back(j);
  value.push_back(v);
}

double SparseCoo::frobenius_sq() const noexcept {
  double s = 0.0;
  for (double v : value) s += v * v;
  return s;
}

std::vector<double> SparseCoo::times(const std::vector<double>& x, std::size_t k) const {
  if (x.size() != cols * k) throw DimensionError("SparseCoo::times: operand shape");
  std::vector<double> y(rows * k, 0.0);
  for (std::size_t e = 0; e < value.size(); ++e) {
    const double a = value[e];
    const double* xr = x.data() + col_index[e] * k;
    double* yr = y.data() + row_index[e] * k;
    for (std::size_t q = 0; q < k; ++q) yr[q] += a * xr[q];
  }
  return y;
}

std::vector<double> SparseCoo::transpose_times(const std::vector<double>& x, std::size_t k) const {
  if (x.size() != rows * k) throw DimensionError("SparseCoo::transpose_times: operand shape");
  std::vector<double> y(cols * k, 0.0);
  for (std::size_t e = 0; e < value.size(); ++e) {
    const double a = value[e];
    const double* xr = x.data() + row_index[e] * k;
    double* yr = y.data() + col_index[e] * k;
    for (std::size_t q = 0; q < k; ++q) yr[q] += a * xr[q];
  }
  return y;
}

SparseCoo random_sparse(std::size_t rows, std::size_t cols, double density, CounterRng& rng) {
  if (!(density > 0.0 && density <= 1.0)) throw ArgumentError("density must be in (0,1]");
  SparseCoo a{rows, cols, {}, {}, {}};
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      if (rng.uniform() < density) a.push(i, j, rng.uniform());
    }
  }
  return a;
}

SparseCoo random_sparse_symmetric(std::size_t n, double density, CounterRng& rng) {
  if (!(density > 0.0 && density <= 1.0)) throw ArgumentError("density must be in (0,1]");
  SparseCoo a{n, n, {}, {}, {}};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      if (rng.uniform() < density) {
        const double v = rng.uniform();
        a.push(i, j, v);
        if (j != i) a.push(j, i, v);
      }
    }
  }
  return a;
}

// ---------------------------------------------------------------- sine saddle

ProblemInstance make_sine_saddle(std::size_t d, std::uint64_t seed) {
  if (d < 2) throw ArgumentError("make_sine_saddle: d must be >= 2");
  CounterRng rng(seed, kProblemStream);
  auto w = std::make_shared<std::vector<double>>(d);
  (*w)[0] = -1e-2;
  for (std::size_t i = 1; i < d; ++i) (*w)[i] = rng.uniform(1.0, 2.0);

  auto value = [w](const DenseVector& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double si = std::sin(x[i]);
      s += (*w)[i] * si * si;
    }
    return s - (*w)[0];
  };
  auto grad = [w](const DenseVector& x) {
    DenseVector g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = (*w)[i] * std::sin(2.0 * x[i]);
    return g;
  };
  ObjectiveOracle::LinearizeFn lin = [w](const DenseVector& x) -> LinearOperator {
    auto diag = std::make_shared<std::vector<double>>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) (*diag)[i] = 2.0 * (*w)[i] * std::cos(2.0 * x[i]);
    return [diag](const DenseVector& u) {
      DenseVector hu(u.size());
      for (std::size_t i = 0; i < u.size(); ++i) hu[i] = (*diag)[i] * u[i];
      return hu;
    };
  };

  double w_max = 0.0;
  double w_min = std::numeric_limits<double>::infinity();
  for (double wi : *w) {
    w_max = std::max(w_max, std::abs(wi));
    w_min = std::min(w_min, std::abs(wi));
  }

  ProblemInstance p{"sine_saddle",
                    {{"d", std::to_string(d)}},
                    seed,
                    ObjectiveOracle(d, value, grad, lin),
                    {},
                    0.0,
                    DenseVector(d),
                    {}};
  p.constants.f_low = 0.0;
  p.constants.mu = 2.0 * w_min;
  p.constants.L_G = 2.0 * w_max;
  p.constants.L_H = 4.0 * w_max;
  // Largest admissible R_s; gamma_s from the coordinatewise distance to the
  // lattice of critical points: some |x_i - c_i| > R_s / sqrt(d).
  const double R_s = *p.constants.mu * *p.constants.mu / (4.0 * *p.constants.L_H * *p.constants.L_G);
  p.constants.R_s = R_s;
  p.constants.gamma_s = w_min * std::sin(2.0 * R_s / std::sqrt(static_cast<double>(d)));
  DenseVector xmin(d);
  xmin[0] = std::numbers::pi / 2.0;
  p.known_minimizers = {xmin, -xmin};
  return p;
}

// ------------------------------------------------------ rank-one factorization

ProblemInstance make_rank_one_factorization_from(std::size_t d, std::vector<double> matrix) {
  if (d < 1 || matrix.size() != d * d) throw DimensionError("rank-one: matrix must be d x d");
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (matrix[i * d + j] != matrix[j * d + i]) throw ArgumentError("rank-one: M not symmetric");
    }
  }
  auto m = std::make_shared<const std::vector<double>>(std::move(matrix));
  auto mul = [m, d](const DenseVector& u) {
    DenseVector y(d);
    for (std::size_t i = 0; i < d; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) s += (*m)[i * d + j] * u[j];
      y[i] = s;
    }
    return y;
  };
  auto value = [m, d](const DenseVector& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        const double e = x[i] * x[j] - (*m)[i * d + j];
        s += e * e;
      }
    }
    return 0.25 * s;
  };
  auto grad = [mul](const DenseVector& x) {
    // (x x^T - M) x = ||x||^2 x - M x
    return axpy(dot(x, x), x, -mul(x));
  };
  auto hvp = [mul](const DenseVector& x, const DenseVector& u) {
    DenseVector hu = axpy(dot(x, x), u, -mul(u));
    axpy_inplace(2.0 * dot(x, u), x, hu);
    return hu;
  };

  ProblemInstance p{"rank_one_factorization",
                    {{"d", std::to_string(d)}},
                    0,
                    ObjectiveOracle(d, value, grad, hvp),
                    {},
                    std::nullopt,
                    std::nullopt,
                    {}};
  p.constants.f_low = 0.0;
  return p;
}

ProblemInstance make_rank_one_factorization(const std::vector<double>& eigenvalues,
                                            std::uint64_t seed) {
  const std::size_t d = eigenvalues.size();
  if (d < 1) throw ArgumentError("rank-one: empty spectrum");
  std::vector<double> sorted = eigenvalues;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  for (std::size_t i = 1; i < d; ++i) {
    if (sorted[i] == sorted[i - 1]) throw DegenerateError("rank-one: repeated eigenvalue");
  }

  CounterRng rng(seed, kProblemStream);
  const std::vector<DenseVector> basis = random_orthonormal(d, rng);
  std::vector<double> m(d * d, 0.0);
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) m[i * d + j] += sorted[k] * basis[k][i] * basis[k][j];
    }
  }
  // Exact symmetry regardless of summation order.
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < i; ++j) m[i * d + j] = m[j * d + i];
  }

  ProblemInstance p = make_rank_one_factorization_from(d, std::move(m));
  p.seed = seed;
  std::string spec;
  for (double e : sorted) spec += (spec.empty() ? "" : ",") + fmt(e);
  p.params["eigenvalues"] = spec;

  const bool has_zero = std::find(sorted.begin(), sorted.end(), 0.0) != sorted.end();
  if (sorted.front() > 0.0 && !has_zero) p.constants.mu = mu_for_factorization(sorted);
  if (sorted.front() > 0.0) {
    double tail = 0.0;
    for (std::size_t i = 1; i < d; ++i) tail += sorted[i] * sorted[i];
    p.known_minimum_value = 0.25 * tail;
    p.known_saddle = DenseVector(d);
    const DenseVector xmin = scaled(std::sqrt(sorted.front()), basis.front());
    p.known_minimizers = {xmin, -xmin};
  } else {
    double all = 0.0;
    for (double e : sorted) all += e * e;
    p.known_minimum_value = 0.25 * all;
  }
  return p;
}

// --------------------------------------------------- rectangular approximation

ProblemInstance make_rect_matrix_approx_from(SparseCoo a_in, std::size_t r, double lambda) {
  const std::size_t m = a_in.rows;
  const std::size_t n = a_in.cols;
  if (m < 1 || n < 1 || r < 1) throw ArgumentError("rect approx: m, n, r must be >= 1");
  if (!(lambda >= 0.0)) throw ArgumentError("rect approx: lambda must be >= 0");
  auto a = std::make_shared<const SparseCoo>(std::move(a_in));
  const double a_sq = a->frobenius_sq();
  const std::size_t nl = m * r;

  auto split = [nl](const DenseVector& x) {
    const std::vector<double>& raw = x.raw();
    return std::pair<Mat, Mat>{Mat(raw.begin(), raw.begin() + nl), Mat(raw.begin() + nl, raw.end())};
  };

  auto value = [=](const DenseVector& x) {
    const auto [l, rr] = split(x);
    const Mat ll = gram(l.data(), l.data(), m, r);
    const Mat gr = gram(rr.data(), rr.data(), n, r);
    double cross = 0.0;
    for (std::size_t e = 0; e < a->nnz(); ++e) {
      const double* li = l.data() + a->row_index[e] * r;
      const double* rj = rr.data() + a->col_index[e] * r;
      double s = 0.0;
      for (std::size_t q = 0; q < r; ++q) s += li[q] * rj[q];
      cross += a->value[e] * s;
    }
    double reg = 0.0;
    for (double v : x) reg += v * v;
    return 0.5 * frob_inner(ll, gr) - cross + 0.5 * a_sq + 0.5 * lambda * reg;
  };

  auto grad = [=](const DenseVector& x) {
    const auto [l, rr] = split(x);
    const Mat ll = gram(l.data(), l.data(), m, r);
    const Mat gr = gram(rr.data(), rr.data(), n, r);
    Mat gl = a->times(rr, r);
    Mat g_r = a->transpose_times(l, r);
    for (double& v : gl) v = -v;
    for (double& v : g_r) v = -v;
    add_times_small(l.data(), gr, m, r, gl.data());
    add_times_small(rr.data(), ll, n, r, g_r.data());
    Mat out(gl.size() + g_r.size());
    std::copy(gl.begin(), gl.end(), out.begin());
    std::copy(g_r.begin(), g_r.end(), out.begin() + nl);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += lambda * x[i];
    return to_dense(std::move(out));
  };

  ObjectiveOracle::LinearizeFn lin = [=](const DenseVector& x) -> LinearOperator {
    auto parts = std::make_shared<std::pair<Mat, Mat>>(split(x));
    auto ll = std::make_shared<const Mat>(gram(parts->first.data(), parts->first.data(), m, r));
    auto gr = std::make_shared<const Mat>(gram(parts->second.data(), parts->second.data(), n, r));
    return [=](const DenseVector& u) {
      const Mat& l = parts->first;
      const Mat& rr = parts->second;
      const auto [du, dv] = split(u);
      // dG_L = U R^T R + L V^T R + L R^T V - A V + lambda U
      // dG_R = V L^T L + R U^T L + R L^T U - A^T U + lambda V
      const Mat vr = gram(dv.data(), rr.data(), n, r);  // V^T R
      const Mat ul = gram(du.data(), l.data(), m, r);   // U^T L
      Mat hl = a->times(dv, r);
      Mat hr = a->transpose_times(du, r);
      for (double& v : hl) v = -v;
      for (double& v : hr) v = -v;
      add_times_small(du.data(), *gr, m, r, hl.data());
      add_times_small(l.data(), vr, m, r, hl.data());
      add_times_small(l.data(), transpose_small(vr, r), m, r, hl.data());
      add_times_small(dv.data(), *ll, n, r, hr.data());
      add_times_small(rr.data(), ul, n, r, hr.data());
      add_times_small(rr.data(), transpose_small(ul, r), n, r, hr.data());
      Mat out(hl.size() + hr.size());
      std::copy(hl.begin(), hl.end(), out.begin());
      std::copy(hr.begin(), hr.end(), out.begin() + nl);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += lambda * u[i];
      return to_dense(std::move(out));
    };
  };

  const std::size_t dim = (m + n) * r;
  ProblemInstance p{"rect_matrix_approx",
                    {{"m", std::to_string(m)},
                     {"n", std::to_string(n)},
                     {"r", std::to_string(r)},
                     {"lambda", fmt(lambda)}},
                    0,
                    ObjectiveOracle(dim, value, grad, lin),
                    {},
                    std::nullopt,
                    std::nullopt,
                    {}};
  p.constants.f_low = 0.0;
  // sigma_max(A) >= ||A||_F / sqrt(min(m, n)) > lambda makes the origin a strict saddle.
  if (std::sqrt(a_sq / static_cast<double>(std::min(m, n))) > lambda) p.known_saddle = DenseVector(dim);
  return p;
}

ProblemInstance make_rect_matrix_approx(std::size_t m, std::size_t n, std::size_t r,
                                        double lambda, double density, std::uint64_t seed) {
  if (m < 1 || n < 1 || r < 1) throw ArgumentError("rect approx: m, n, r must be >= 1");
  CounterRng rng(seed, kProblemStream);
  ProblemInstance p = make_rect_matrix_approx_from(random_sparse(m, n, density, rng), r, lambda);
  p.seed = seed;
  p.params["density"] = fmt(density);
  return p;
}

// ----------------------------------------------------------- PSD approximation

ProblemInstance make_psd_matrix_approx_from(SparseCoo a_in, std::size_t r) {
  const std::size_t n = a_in.rows;
  if (n < 1 || r < 1 || a_in.cols != n) throw ArgumentError("psd approx: need square A, r >= 1");
  auto a = std::make_shared<const SparseCoo>(std::move(a_in));
  const double a_sq = a->frobenius_sq();

  auto value = [=](const DenseVector& x) {
    const Mat& xm = x.raw();
    const Mat xx = gram(xm.data(), xm.data(), n, r);
    const Mat ax = a->times(xm, r);
    double cross = 0.0;  // <A, X X^T> = <A X, X>
    for (std::size_t i = 0; i < xm.size(); ++i) cross += ax[i] * xm[i];
    return 0.25 * frob_inner(xx, xx) - 0.5 * cross + 0.25 * a_sq;
  };
  auto grad = [=](const DenseVector& x) {
    const Mat& xm = x.raw();
    const Mat xx = gram(xm.data(), xm.data(), n, r);
    Mat g = a->times(xm, r);
    for (double& v : g) v = -v;
    add_times_small(xm.data(), xx, n, r, g.data());
    return to_dense(std::move(g));
  };
  ObjectiveOracle::LinearizeFn lin = [=](const DenseVector& x) -> LinearOperator {
    auto xm = std::make_shared<const Mat>(x.raw());
    auto xx = std::make_shared<const Mat>(gram(xm->data(), xm->data(), n, r));
    return [=](const DenseVector& u) {
      // U X^T X + X U^T X + X X^T U - A U
      const Mat& um = u.raw();
      const Mat ux = gram(um.data(), xm->data(), n, r);  // U^T X
      Mat h = a->times(um, r);
      for (double& v : h) v = -v;
      add_times_small(um.data(), *xx, n, r, h.data());
      add_times_small(xm->data(), ux, n, r, h.data());
      add_times_small(xm->data(), transpose_small(ux, r), n, r, h.data());
      return to_dense(std::move(h));
    };
  };

  ProblemInstance p{"psd_matrix_approx",
                    {{"n", std::to_string(n)}, {"r", std::to_string(r)}},
                    0,
                    ObjectiveOracle(n * r, value, grad, lin),
                    {},
                    std::nullopt,
                    std::nullopt,
                    {}};
  p.constants.f_low = 0.0;
  // The Hessian at 0 is -A on each column; 1^T A 1 > 0 gives A a positive
  // eigenvalue, so the origin is then a strict saddle.
  double total = 0.0;
  for (double v : a->value) total += v;
  if (total > 0.0) p.known_saddle = DenseVector(n * r);
  return p;
}

ProblemInstance make_psd_matrix_approx(std::size_t n, std::size_t r, double density,
                                       std::uint64_t seed) {
  if (n < 1 || r < 1) throw ArgumentError("psd approx: n, r must be >= 1");
  CounterRng rng(seed, kProblemStream);
  ProblemInstance p = make_psd_matrix_approx_from(random_sparse_symmetric(n, density, rng), r);
  p.seed = seed;
  p.params["density"] = fmt(density);
  return p;
}

// ---------------------------------------------------------- worst-case cosine

ProblemInstance make_worst_case_cosine(std::size_t d) {
  if (d < 1) throw ArgumentError("worst-case cosine: d must be >= 1");
  auto value = [d](const DenseVector& x) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < d; ++i) s += x[i] * x[i];
    return std::cos(x[d - 1]) - 1.0 + 0.5 * s;
  };
  auto grad = [d](const DenseVector& x) {
    DenseVector g = x;
    g[d - 1] = -std::sin(x[d - 1]);
    return g;
  };
  auto hvp = [d](const DenseVector& x, const DenseVector& u) {
    DenseVector h = u;
    h[d - 1] = -std::cos(x[d - 1]) * u[d - 1];
    return h;
  };
  ProblemInstance p{"worst_case_cosine",
                    {{"d", std::to_string(d)}},
                    0,
                    ObjectiveOracle(d, value, grad, hvp),
                    {},
                    -2.0,
                    DenseVector(d),
                    {}};
  p.constants.f_low = -2.0;
  p.constants.L_G = 1.0;
  p.constants.L_H = 1.0;
  p.constants.mu = 1.0;
  p.constants.R_s = 0.25;
  p.constants.gamma_s = 1.0 / (2.0 * std::numbers::pi);
  DenseVector xmin(d);
  xmin[d - 1] = std::numbers::pi;
  p.known_minimizers = {xmin, -xmin};
  return p;
}

// --------------------------------------------------- nonlinear synchronization

namespace {

// Per-particle quantities at a point: y_i = x_i / r_i, E_ij = exp(beta <y_i, y_j>),
// G_i = -(1/n^2) sum_j E_ij y_j (the derivative of the attraction in y_i).
struct SyncFrame {
  std::size_t d = 0, n = 0;
  std::vector<double> y, r, e, gy;
};

SyncFrame sync_frame(const DenseVector& x, std::size_t d, std::size_t n, double beta) {
  SyncFrame f{d, n, std::vector<double>(n * d), std::vector<double>(n), std::vector<double>(n * n),
              std::vector<double>(n * d, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t c = 0; c < d; ++c) s += x[i * d + c] * x[i * d + c];
    if (!(s > 0.0)) throw NumericalError("synchronization: particle at the origin");
    f.r[i] = std::sqrt(s);
    for (std::size_t c = 0; c < d; ++c) f.y[i * d + c] = x[i * d + c] / f.r[i];
  }
  const double w = 1.0 / static_cast<double>(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) s += f.y[i * d + c] * f.y[j * d + c];
      f.e[i * n + j] = f.e[j * n + i] = std::exp(beta * s);
    }
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t c = 0; c < d; ++c) f.gy[i * d + c] -= w * f.e[i * n + j] * f.y[j * d + c];
    }
  }
  return f;
}

}  // namespace

ProblemInstance make_nonlinear_synchronization(std::size_t d, std::size_t n, double beta,
                                               std::uint64_t seed, double penalty) {
  if (d < 2 || n < 2) throw ArgumentError("synchronization: need d >= 2 and n >= 2");
  if (!(beta > 0.0)) throw ArgumentError("synchronization: beta must be positive");
  if (!(penalty >= 0.0)) throw ArgumentError("synchronization: penalty must be >= 0");
  const double w = 1.0 / static_cast<double>(n * n);

  auto value = [=](const DenseVector& x) {
    const SyncFrame f = sync_frame(x, d, n, beta);
    double attr = 0.0;
    for (double v : f.e) attr += v;
    double pen = 0.0;
    for (double ri : f.r) pen += (ri * ri - 1.0) * (ri * ri - 1.0);
    return -attr * w / (2.0 * beta) + 0.5 * penalty * pen;
  };
  auto grad = [=](const DenseVector& x) {
    const SyncFrame f = sync_frame(x, d, n, beta);
    DenseVector g(n * d);
    for (std::size_t i = 0; i < n; ++i) {
      const double* yi = f.y.data() + i * d;
      const double* gi = f.gy.data() + i * d;
      double yg = 0.0;
      for (std::size_t c = 0; c < d; ++c) yg += yi[c] * gi[c];
      const double pr = 2.0 * penalty * (f.r[i] * f.r[i] - 1.0) * f.r[i];
      for (std::size_t c = 0; c < d; ++c) {
        g[i * d + c] = (gi[c] - yg * yi[c]) / f.r[i] + pr * yi[c];
      }
    }
    return g;
  };
  ObjectiveOracle::LinearizeFn lin = [=](const DenseVector& x) -> LinearOperator {
    auto f = std::make_shared<const SyncFrame>(sync_frame(x, d, n, beta));
    return [=](const DenseVector& u) {
      const auto& y = f->y;
      // ydot_i = (I - y_i y_i^T) u_i / r_i, rdot_i = <y_i, u_i>
      std::vector<double> yd(n * d), rd(n);
      for (std::size_t i = 0; i < n; ++i) {
        double yu = 0.0;
        for (std::size_t c = 0; c < d; ++c) yu += y[i * d + c] * u[i * d + c];
        rd[i] = yu;
        for (std::size_t c = 0; c < d; ++c) {
          yd[i * d + c] = (u[i * d + c] - yu * y[i * d + c]) / f->r[i];
        }
      }
      // a_ij = <ydot_i, y_j>
      std::vector<double> a(n * n);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          double s = 0.0;
          for (std::size_t c = 0; c < d; ++c) s += yd[i * d + c] * y[j * d + c];
          a[i * n + j] = s;
        }
      }
      DenseVector h(n * d);
      std::vector<double> dg(d);
      for (std::size_t i = 0; i < n; ++i) {
        std::fill(dg.begin(), dg.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
          const double eij = f->e[i * n + j];
          const double cy = -w * eij * beta * (a[i * n + j] + a[j * n + i]);
          const double cd = -w * eij;
          for (std::size_t c = 0; c < d; ++c) dg[c] += cy * y[j * d + c] + cd * yd[j * d + c];
        }
        const double* yi = y.data() + i * d;
        const double* ydi = yd.data() + i * d;
        const double* gi = f->gy.data() + i * d;
        const double ri = f->r[i];
        double yg = 0.0, ydg = 0.0, ydgd = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
          yg += yi[c] * gi[c];
          ydg += ydi[c] * gi[c];
          ydgd += yi[c] * dg[c];
        }
        // d/dt of (I - y y^T) G / r
        for (std::size_t c = 0; c < d; ++c) {
          const double tang = gi[c] - yg * yi[c];
          h[i * d + c] = (-yg * ydi[c] - ydg * yi[c] + dg[c] - ydgd * yi[c]) / ri -
                         tang * rd[i] / (ri * ri);
        }
        // penalty: grad = 2P (r^2 - 1) x_i
        const double t = ri * ri - 1.0;
        for (std::size_t c = 0; c < d; ++c) {
          h[i * d + c] += 2.0 * penalty * (2.0 * rd[i] * ri * ri * yi[c] + t * u[i * d + c]);
        }
      }
      return h;
    };
  };

  ProblemInstance p{"nonlinear_synchronization",
                    {{"d", std::to_string(d)},
                     {"n", std::to_string(n)},
                     {"beta", fmt(beta)},
                     {"penalty", fmt(penalty)}},
                    seed,
                    ObjectiveOracle(n * d, value, grad, lin),
                    {},
                    -std::exp(beta) / (2.0 * beta),
                    std::nullopt,
                    {}};
  p.constants.f_low = -std::exp(beta) / (2.0 * beta);
  return p;
}

// ------------------------------------------------------------------- helpers

DenseVector near_point(const DenseVector& center, double radius, std::uint64_t seed) {
  if (!(radius >= 0.0)) throw ArgumentError("near_point: radius must be >= 0");
  CounterRng rng(seed, kInitStream);
  return axpy(radius, sample_unit_sphere(center.size(), rng), center);
}

DenseVector random_point(std::size_t d, double scale, std::uint64_t seed) {
  CounterRng rng(seed, kInitStream);
  return scaled(scale, sample_gaussian(d, rng));
}

DenseVector gradient_descent(ObjectiveOracle& oracle, DenseVector x, double step,
                             std::size_t iterations) {
  if (!(step > 0.0)) throw ArgumentError("gradient_descent: step must be positive");
  for (std::size_t t = 0; t < iterations; ++t) axpy_inplace(-step, oracle.gradient(x), x);
  return x;
}

}  // namespace randtr
