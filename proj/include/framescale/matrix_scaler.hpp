#pragma once

// Matrix scaling with an implicit row scaling x_i = r_i / (Ay)_i.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "framescale/frame_scaler.hpp"
#include "framescale/regularizer.hpp"

namespace framescale {

/// m x n entrywise nonnegative matrix without zero rows or columns.
class NonnegMatrix {
 public:
  NonnegMatrix() = default;

  explicit NonnegMatrix(Matrix entries) : a_(std::move(entries)) {
    if (a_.rows() < 1 || a_.cols() < 1) throw InvalidInput("matrix: empty");
    if (!a_.allFinite()) throw InvalidInput("matrix: non-finite entry");
    if ((a_.array() < 0.0).any()) throw InvalidInput("matrix: negative entry");
    row_support_.resize(static_cast<std::size_t>(a_.rows()));
    col_support_.resize(static_cast<std::size_t>(a_.cols()));
    for (Index j = 0; j < a_.cols(); ++j)
      for (Index i = 0; i < a_.rows(); ++i)
        if (a_(i, j) > 0.0) {
          row_support_[static_cast<std::size_t>(i)].push_back(j);
          col_support_[static_cast<std::size_t>(j)].push_back(i);
        }
    for (Index i = 0; i < a_.rows(); ++i)
      if (row_support_[static_cast<std::size_t>(i)].empty()) throw InvalidInput("matrix: zero row " + std::to_string(i));
    for (Index j = 0; j < a_.cols(); ++j)
      if (col_support_[static_cast<std::size_t>(j)].empty()) throw InvalidInput("matrix: zero column " + std::to_string(j));
  }

  Index m() const noexcept { return a_.rows(); }
  Index n() const noexcept { return a_.cols(); }
  const Matrix& matrix() const noexcept { return a_; }
  const IndexSet& row_support(Index i) const { return row_support_[static_cast<std::size_t>(i)]; }
  const IndexSet& col_support(Index j) const { return col_support_[static_cast<std::size_t>(j)]; }

 private:
  Matrix a_;
  std::vector<IndexSet> row_support_;
  std::vector<IndexSet> col_support_;
};

struct MatrixMarginals {
  Vector r;
  Vector c;
  double s = 0.0;

  MatrixMarginals() = default;
  MatrixMarginals(Vector rows, Vector cols) : r(std::move(rows)), c(std::move(cols)) {
    s = r.sum();
    validate_marginals(r, s, "row marginals");
    validate_marginals(c, s, "column marginals");
  }
};

inline Vector row_masses(const NonnegMatrix& a, const Vector& y) {
  const Vector ay = a.matrix() * y;
  for (Index i = 0; i < ay.size(); ++i)
    if (!(ay(i) > 0.0)) throw ZeroRowSum("column_sums: row " + std::to_string(i) + " has zero mass");
  return ay;
}

/// c_j(y) = sum_i r_i A_ij y_j / (Ay)_i
inline Vector column_sums(const NonnegMatrix& a, const Vector& r, const Vector& y) {
  if (y.size() != a.n() || r.size() != a.m()) throw InvalidInput("column_sums: dimension mismatch");
  const Vector ay = row_masses(a, y);
  const Vector w = r.cwiseQuotient(ay);
  return (a.matrix().transpose() * w).cwiseProduct(y);
}

/// Row sums of XAY with x_i = r_i / (Ay)_i, evaluated explicitly.
inline Vector row_sums(const NonnegMatrix& a, const Vector& r, const Vector& y) {
  const Vector ay = row_masses(a, y);
  Vector out(a.m());
  for (Index i = 0; i < a.m(); ++i) out(i) = r(i) / ay(i) * ay(i);
  return out;
}

/// Rows touching T, ascending.
inline IndexSet neighborhood(const NonnegMatrix& a, const IndexSet& t) {
  std::vector<bool> hit(static_cast<std::size_t>(a.m()), false);
  for (Index j : t)
    for (Index i : a.col_support(j)) hit[static_cast<std::size_t>(i)] = true;
  IndexSet out;
  for (Index i = 0; i < a.m(); ++i)
    if (hit[static_cast<std::size_t>(i)]) out.push_back(i);
  return out;
}

/// Share of row mass on T, mu_i = sum_{j in T} A_ij y_j / (Ay)_i, for i in N(T).
struct RowShares {
  IndexSet rows;
  Vector mu;
};

inline RowShares row_shares(const NonnegMatrix& a, const Vector& y, const IndexSet& t) {
  RowShares out;
  out.rows = neighborhood(a, t);
  const Vector ay = row_masses(a, y);
  Vector in_t = Vector::Zero(a.m());
  for (Index j : t)
    for (Index i : a.col_support(j)) in_t(i) += a.matrix()(i, j) * y(j);
  out.mu.resize(static_cast<Index>(out.rows.size()));
  for (std::size_t k = 0; k < out.rows.size(); ++k) {
    const Index i = out.rows[k];
    out.mu(static_cast<Index>(k)) = std::min(in_t(i) / ay(i), 1.0);
  }
  return out;
}

/// h(alpha) = sum_{i in N(T)} r_i alpha mu_i / (1 + (alpha - 1) mu_i)
inline double matrix_proxy_h(const RowShares& sh, const Vector& r, double alpha) {
  double acc = 0.0;
  for (std::size_t k = 0; k < sh.rows.size(); ++k) {
    const double mu = sh.mu(static_cast<Index>(k));
    acc += r(sh.rows[k]) * alpha * mu / (1.0 + (alpha - 1.0) * mu);
  }
  return acc;
}

struct MatrixUpdateResult {
  double alpha = 1.0;
  double g_sup = 0.0;  // sum_{i in N(T)} r_i (1 - mu_i)
  double h_one = 0.0;
  double h_alpha = 0.0;
};

/// Solves g(alpha - 1) = gamma for g(beta) = sum_i r_i (1 - mu_i) min(beta mu_i, 1).
inline MatrixUpdateResult matrix_update(const NonnegMatrix& a, const Vector& r, const Vector& y, const IndexSet& t,
                                        double gamma) {
  if (!(gamma > 0.0)) throw PreconditionViolated("matrix_update: gamma must be positive");
  const RowShares sh = row_shares(a, y, t);
  const auto rows = static_cast<Index>(sh.rows.size());

  std::vector<Index> order(static_cast<std::size_t>(rows));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&sh](Index p, Index q) { return sh.mu(p) > sh.mu(q); });

  // saturated[k]: sum of r(1-mu) over the first k sorted rows; linear[k]: sum of r(1-mu)mu over the rest
  std::vector<double> saturated(static_cast<std::size_t>(rows) + 1, 0.0);
  std::vector<double> linear(static_cast<std::size_t>(rows) + 1, 0.0);
  for (Index k = 0; k < rows; ++k) {
    const Index p = order[static_cast<std::size_t>(k)];
    saturated[static_cast<std::size_t>(k) + 1] = saturated[static_cast<std::size_t>(k)] + r(sh.rows[static_cast<std::size_t>(p)]) * (1.0 - sh.mu(p));
  }
  for (Index k = rows - 1; k >= 0; --k) {
    const Index p = order[static_cast<std::size_t>(k)];
    const double mu = sh.mu(p);
    linear[static_cast<std::size_t>(k)] = linear[static_cast<std::size_t>(k) + 1] + r(sh.rows[static_cast<std::size_t>(p)]) * (1.0 - mu) * mu;
  }

  MatrixUpdateResult out;
  out.g_sup = saturated[static_cast<std::size_t>(rows)];
  if (out.g_sup < gamma) throw InfeasibleSegment("matrix_update: proxy supremum below gamma");

  double beta = -1.0;
  Index k = 0;
  while (k < rows) {
    // merge ties: rows sharing the breakpoint saturate together
    Index next = k;
    const double mu = sh.mu(order[static_cast<std::size_t>(k)]);
    while (next < rows && sh.mu(order[static_cast<std::size_t>(next)]) == mu) ++next;
    const double end = 1.0 / mu;
    const double lin = linear[static_cast<std::size_t>(k)];
    const double sat = saturated[static_cast<std::size_t>(k)];
    if (lin > 0.0 && sat + end * lin >= gamma) {
      beta = (gamma - sat) / lin;
      break;
    }
    k = next;
  }
  // gamma within rounding of the supremum: take the last breakpoint
  if (beta < 0.0) beta = 1.0 / sh.mu(order.back());
  out.alpha = 1.0 + beta;
  out.h_one = matrix_proxy_h(sh, r, 1.0);
  out.h_alpha = matrix_proxy_h(sh, r, out.alpha);
  return out;
}

/// rho_T(A) = max_{i in N(T)} sum_{j not in T} A_ij / sum_{j in T} A_ij for every
/// prefix T_k = order[0..k), k = 1..n-1, in one pass.
inline std::vector<double> prefix_rho(const NonnegMatrix& a, const std::vector<Index>& order) {
  const Index m = a.m();
  const Vector total = a.matrix().rowwise().sum();
  Vector in = Vector::Zero(m);
  std::vector<double> out;
  out.reserve(order.size());
  for (std::size_t k = 0; k + 1 < order.size(); ++k) {
    const Index j = order[k];
    for (Index i : a.col_support(j)) in(i) += a.matrix()(i, j);
    double rho = 0.0;
    for (Index i = 0; i < m; ++i)
      if (in(i) > 0.0) rho = std::max(rho, (total(i) - in(i)) / in(i));
    out.push_back(rho);
  }
  return out;
}

/// Shrink-and-snap with cap max(rho_T(A), 1) / delta on each sorted prefix.
inline RegularizeResult regularize_matrix(const NonnegMatrix& a, const Vector& y, double delta) {
  const std::vector<Index> order = descending_order(y);
  const std::vector<double> rho = prefix_rho(a, order);
  return shrink_and_snap(y, delta, [&rho](const IndexSet& prefix) {
    return std::max(rho[prefix.size() - 1], 1.0);
  });
}

/// Hall condition c(T) <= r(N(T)) with slack 1e-9 s.
inline std::optional<IndexSet> check_hall(const NonnegMatrix& a, const MatrixMarginals& mm, const IndexSet& t) {
  double ct = 0.0;
  for (Index j : t) ct += mm.c(j);
  double rn = 0.0;
  for (Index i : neighborhood(a, t)) rn += mm.r(i);
  if (ct > rn + 1e-9 * mm.s) return t;
  return std::nullopt;
}

/// delta = gamma / (15 s n^3)
inline double matrix_delta(double gamma, double s, Index n) {
  const double nn = static_cast<double>(n);
  return gamma / (15.0 * s * nn * nn * nn);
}

struct MatrixScalingResult {
  Status status = Status::Scaled;
  Vector y;
  IndexSet certificate;
  std::vector<IterationRecord> trace;
  std::int64_t iterations = 0;
  double final_error_sq = 0.0;
};

inline double matrix_error_sq(const NonnegMatrix& a, const MatrixMarginals& mm, const Vector& y) {
  return (row_sums(a, mm.r, y) - mm.r).squaredNorm() + (column_sums(a, mm.r, y) - mm.c).squaredNorm();
}

inline MatrixScalingResult run_matrix(const NonnegMatrix& a, const MatrixMarginals& mm, double eps,
                                      const SolverConfig& config = {}) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidInput("run_matrix: eps must be positive");
  if (mm.r.size() != a.m() || mm.c.size() != a.n()) throw InvalidInput("run_matrix: marginals do not match matrix");
  const Index n = a.n();
  const std::int64_t cap = config.max_iters > 0 ? config.max_iters : default_max_iters(n, eps);

  MatrixScalingResult res;
  res.y = Vector::Ones(n);
  for (;;) {
    const Vector col = column_sums(a, mm.r, res.y);
    const double err_sq = (row_sums(a, mm.r, res.y) - mm.r).squaredNorm() + (col - mm.c).squaredNorm();
    res.final_error_sq = err_sq;
    if (err_sq <= eps * eps) return res;
    if (res.iterations >= cap)
      throw IterationCapExceeded("run_matrix: iteration cap " + std::to_string(cap) + " exceeded", std::move(res.trace));
    if (n < 2) throw InvalidInput("run_matrix: a single column cannot carry a nonzero error");

    const MarginSet margin = select_margin_set(col, mm.c, 1e-8 * std::max(1.0, mm.s));
    const IndexSet t = margin.set();
    if (auto cert = check_hall(a, mm, t)) {
      res.status = Status::Infeasible;
      res.certificate = *cert;
      return res;
    }

    IterationRecord rec;
    rec.error_sq = err_sq;
    rec.gamma = margin.gamma;
    rec.set_size = static_cast<std::int64_t>(t.size());
    const MatrixUpdateResult up = matrix_update(a, mm.r, res.y, t, margin.gamma);
    rec.alpha_hat = up.alpha;
    rec.progress = up.h_alpha - up.h_one;

    Vector next = res.y;
    for (Index j : t) next(j) *= up.alpha;
    rec.log_range_pre_reg = log_range(next);
    if (config.audit) rec.error_sq_pre_reg = matrix_error_sq(a, mm, next);

    if (config.regularize) {
      rec.delta = matrix_delta(margin.gamma, mm.s, n);
      RegularizeResult reg = regularize_matrix(a, next, rec.delta);
      rec.regularized = reg.cuts > 0;
      next = std::move(reg.z);
    }
    next /= next.minCoeff();
    rec.log_range = log_range(next);
    res.y = std::move(next);
    ++res.iterations;
    if (config.record_trace) res.trace.push_back(rec);
  }
}

}  // namespace framescale
