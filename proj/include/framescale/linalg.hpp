#pragma once

// Dense linear-algebra primitives shared by the frame and matrix scalers:
// frames, Gram factorizations, leverage scores, numerical rank, log-determinants
// and pseudo-inverse traces.

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "framescale/errors.hpp"

namespace framescale {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
/// Column index set. Kept sorted ascending unless documented otherwise.
using IndexSet = std::vector<Index>;

inline constexpr double kMachineEps = std::numeric_limits<double>::epsilon();

namespace detail {

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

inline double asymmetry(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

inline void require_symmetric(const Matrix& m, const char* who) {
  if (m.rows() != m.cols()) throw NotSymmetric(std::string(who) + ": matrix is not square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (asymmetry(m) > 1e-12 * scale) throw NotSymmetric(std::string(who) + ": matrix is not symmetric");
}

}  // namespace detail

/// Column-pivoted modified Gram-Schmidt with one reorthogonalization pass.
///
/// Returns an orthonormal basis (d x r) of the column span. A pivot is accepted
/// iff its residual norm exceeds
///   tau = tolerance_scale * max(d, k) * eps * (largest column norm).
inline Matrix orthonormal_basis(const Matrix& columns, double tolerance_scale = 1.0) {
  const Index d = columns.rows();
  const Index k = columns.cols();
  if (k == 0 || d == 0) return Matrix(d, 0);

  // rescale so that squared norms neither underflow nor overflow
  const double amax = columns.cwiseAbs().maxCoeff();
  if (!(amax > 0.0)) return Matrix(d, 0);
  Matrix work = columns / amax;
  const double largest = work.colwise().norm().maxCoeff();
  const double tau = tolerance_scale * static_cast<double>(std::max(d, k)) * kMachineEps * largest;

  std::vector<bool> used(static_cast<std::size_t>(k), false);
  Matrix basis(d, std::min(d, k));
  Index rank = 0;
  while (rank < std::min(d, k)) {
    Index pivot = -1;
    double best = -1.0;
    for (Index j = 0; j < k; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      const double nrm = work.col(j).norm();
      if (nrm > best) {
        best = nrm;
        pivot = j;
      }
    }
    if (pivot < 0 || !(best > tau)) break;
    used[static_cast<std::size_t>(pivot)] = true;
    Vector q = work.col(pivot) / best;
    // second pass against the accepted basis keeps q orthogonal to working precision
    q -= basis.leftCols(rank) * (basis.leftCols(rank).transpose() * q);
    q.normalize();
    basis.col(rank) = q;
    ++rank;
    for (Index j = 0; j < k; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      work.col(j) -= q * q.dot(work.col(j));
      work.col(j) -= q * q.dot(work.col(j));
    }
  }
  return basis.leftCols(rank);
}

/// Numerical rank by column-pivoted orthogonalization (see orthonormal_basis).
inline Index numerical_rank(const Matrix& columns, double tolerance_scale = 1.0) {
  return orthonormal_basis(columns, tolerance_scale).cols();
}

/// log det of a symmetric PSD matrix; -infinity when the factorization breaks down.
inline double logdet_psd(const Matrix& m) {
  detail::require_symmetric(m, "logdet_psd");
  if (m.rows() == 0) return 0.0;
  Eigen::LLT<Matrix> llt(detail::symmetrized(m));
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  const auto diag = llt.matrixLLT().diagonal();
  double acc = 0.0;
  for (Index i = 0; i < diag.size(); ++i) {
    if (!(diag(i) > 0.0)) return -std::numeric_limits<double>::infinity();
    acc += std::log(diag(i));
  }
  return 2.0 * acc;
}

/// Trace of the Moore-Penrose pseudo-inverse of a symmetric PSD matrix.
/// Eigenvalues at or below k * eps * lambda_max are treated as zero.
inline double pinv_trace(const Matrix& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(detail::symmetrized(m), Eigen::EigenvaluesOnly);
  const Vector& ev = es.eigenvalues();
  const double lmax = ev.maxCoeff();
  if (!(lmax > 0.0)) return 0.0;
  const double cutoff = static_cast<double>(m.rows()) * kMachineEps * lmax;
  double acc = 0.0;
  for (Index i = 0; i < ev.size(); ++i)
    if (ev(i) > cutoff) acc += 1.0 / ev(i);
  return acc;
}

/// A d x n real matrix of full row rank; column j is the vector u_j.
class Frame {
 public:
  Frame() = default;

  explicit Frame(Matrix entries, double rank_tolerance_scale = 1.0) : u_(std::move(entries)) {
    if (u_.rows() < 1 || u_.cols() < 1) throw InvalidInput("frame: empty matrix");
    if (u_.cols() < u_.rows()) throw InvalidInput("frame: need n >= d columns");
    if (!detail::all_finite(u_)) throw InvalidInput("frame: non-finite entry");
    if (numerical_rank(u_, rank_tolerance_scale) != u_.rows())
      throw InvalidInput("frame: matrix is not of full row rank");
  }

  Index d() const noexcept { return u_.rows(); }
  Index n() const noexcept { return u_.cols(); }
  const Matrix& matrix() const noexcept { return u_; }
  auto column(Index j) const { return u_.col(j); }

  /// The submatrix U_T with columns in the order given.
  Matrix columns(const IndexSet& t) const {
    Matrix out(u_.rows(), static_cast<Index>(t.size()));
    for (std::size_t i = 0; i < t.size(); ++i) out.col(static_cast<Index>(i)) = u_.col(t[i]);
    return out;
  }

 private:
  Matrix u_;
};

inline void require_scaling(const Frame& frame, const Vector& z) {
  if (z.size() != frame.n()) throw InvalidInput("scaling: length does not match frame");
  for (Index j = 0; j < z.size(); ++j)
    if (!(z(j) > 0.0) || !std::isfinite(z(j))) throw InvalidInput("scaling: entries must be positive and finite");
}

/// U diag(z) U^T over a column subset (all columns when `t` is null).
inline Matrix weighted_gram(const Matrix& u, const Vector& z, const IndexSet* t = nullptr) {
  const Index d = u.rows();
  Matrix g = Matrix::Zero(d, d);
  if (t == nullptr) {
    g.noalias() = u * z.asDiagonal() * u.transpose();
  } else {
    for (Index j : *t) g.noalias() += z(j) * u.col(j) * u.col(j).transpose();
  }
  return detail::symmetrized(g);
}

/// Factorized UZU^T. Every (UZU^T)^{-1} application in the library goes through here.
///
/// The factor comes from a column-pivoted Householder QR of Z^{1/2} U^T with rows
/// sorted by decreasing norm, B P = Q R, so UZU^T = L L^T with L = P R^T. The Gram
/// matrix itself is never factored; graded scalings spanning 1e+-12 stay accurate.
class GramContext {
 public:
  GramContext(const Frame& frame, const Vector& z) {
    require_scaling(frame, z);
    const Index n = frame.n();
    const Index d = frame.d();
    Matrix b(n, d);
    for (Index j = 0; j < n; ++j) b.row(j) = std::sqrt(z(j)) * frame.column(j).transpose();
    std::vector<Index> order(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j) order[static_cast<std::size_t>(j)] = j;
    const Vector norms = b.rowwise().norm();
    std::stable_sort(order.begin(), order.end(), [&norms](Index a, Index c) { return norms(a) > norms(c); });
    Matrix sorted(n, d);
    for (Index k = 0; k < n; ++k) sorted.row(k) = b.row(order[static_cast<std::size_t>(k)]);

    Eigen::ColPivHouseholderQR<Matrix> qr(sorted);
    r_ = qr.matrixR().topLeftCorner(d, d).triangularView<Eigen::Upper>();
    perm_ = qr.colsPermutation();
    const Vector diag = r_.diagonal().cwiseAbs();
    if (!diag.allFinite()) throw FactorizationFailure("gram_context: non-finite factor");
    if (!(diag.minCoeff() > 0.0)) throw FactorizationFailure("gram_context: UZU^T is numerically singular");
    gram_ = weighted_gram(frame.matrix(), z);
  }

  const Matrix& gram() const noexcept { return gram_; }
  Index d() const noexcept { return r_.rows(); }

  /// (UZU^T)^{-1} b
  Matrix solve(const Matrix& b) const {
    const Matrix w = whiten(b);
    return perm_ * r_.triangularView<Eigen::Upper>().solve(w);
  }

  /// L^{-1} b for a factor L L^T = UZU^T.
  Matrix whiten(const Matrix& b) const {
    const Matrix pb = perm_.transpose() * b;
    return r_.transpose().triangularView<Eigen::Lower>().solve(pb);
  }

  double inner(const Vector& x, const Vector& y) const { return whiten(x).col(0).dot(whiten(y).col(0)); }

 private:
  Matrix gram_;
  Matrix r_;
  Eigen::ColPivHouseholderQR<Matrix>::PermutationType perm_;
};

inline GramContext gram_context(const Frame& frame, const Vector& z) { return GramContext(frame, z); }

/// l_j = z_j u_j^T (UZU^T)^{-1} u_j for every column.
inline Vector leverage_scores(const Frame& frame, const Vector& z, const GramContext& ctx) {
  const Matrix w = ctx.whiten(frame.matrix());
  Vector lev(frame.n());
  for (Index j = 0; j < frame.n(); ++j) lev(j) = z(j) * w.col(j).squaredNorm();
  return lev;
}

inline Vector leverage_scores(const Frame& frame, const Vector& z) {
  return leverage_scores(frame, z, GramContext(frame, z));
}

/// Whitened, scaled columns V_T = L^{-1} U_T Z_T^{1/2}.
inline Matrix whitened_columns(const Frame& frame, const Vector& z, const IndexSet& t, const GramContext& ctx) {
  Matrix v = ctx.whiten(frame.columns(t));
  for (std::size_t i = 0; i < t.size(); ++i) v.col(static_cast<Index>(i)) *= std::sqrt(z(t[i]));
  return v;
}

/// Complement of `t` in [0, n), ascending.
inline IndexSet complement(const IndexSet& t, Index n) {
  std::vector<bool> in(static_cast<std::size_t>(n), false);
  for (Index j : t) in[static_cast<std::size_t>(j)] = true;
  IndexSet out;
  out.reserve(static_cast<std::size_t>(n) - t.size());
  for (Index j = 0; j < n; ++j)
    if (!in[static_cast<std::size_t>(j)]) out.push_back(j);
  return out;
}

}  // namespace framescale
