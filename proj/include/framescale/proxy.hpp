#pragma once

// The proxy h(a) = tr[a M_T (M_Tbar + a M_T)^{-1}] and its derivative.
//
// Evaluation happens in a basis adapted to span(U_T). With Qb spanning U_T and Qp
// its orthogonal complement, M_T = [[N, 0], [0, 0]] and M_Tbar = [[A, B], [B^T, C]],
// so the top-left block of (M_Tbar + a M_T)^{-1} is (a N + E)^{-1} where
// E = A - B C^{-1} B^T. Then
//   h(a)  = a tr[(a N + E)^{-1} N]
//   h'(a) = tr[(a N + E)^{-1} N (a N + E)^{-1} E].
// Null directions of M_T never enter, so h(a) stays within rounding of rk(U_T)
// even for a around 1e12.

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "framescale/linalg.hpp"

namespace framescale {

class ProxyContext {
 public:
  ProxyContext(const Frame& frame, const Vector& z, const IndexSet& t, double rank_tolerance_scale = 1.0) {
    require_scaling(frame, z);
    if (t.empty() || static_cast<Index>(t.size()) >= frame.n())
      throw InvalidInput("proxy: T must be a nonempty proper subset");
    const Index d = frame.d();
    const IndexSet tbar = complement(t, frame.n());
    m_t_ = weighted_gram(frame.matrix(), z, &t);
    m_tbar_ = weighted_gram(frame.matrix(), z, &tbar);

    const Matrix u_t = frame.columns(t);
    const Matrix basis = orthonormal_basis(u_t, rank_tolerance_scale);
    rank_ = basis.cols();
    if (rank_ == 0) return;

    Matrix full = Matrix::Identity(d, d);
    if (rank_ < d) {
      Eigen::HouseholderQR<Matrix> qr(basis);
      full = qr.householderQ() * Matrix::Identity(d, d);
    } else {
      full = basis;
    }
    const Matrix qb = full.leftCols(rank_);
    const Matrix qp = full.rightCols(d - rank_);

    Matrix w = qb.transpose() * u_t;
    for (std::size_t i = 0; i < t.size(); ++i) w.col(static_cast<Index>(i)) *= std::sqrt(z(t[i]));
    n_ = detail::symmetrized(w * w.transpose());

    const Matrix a = qb.transpose() * m_tbar_ * qb;
    if (rank_ < d) {
      const Matrix b = qb.transpose() * m_tbar_ * qp;
      const Matrix c = detail::symmetrized(qp.transpose() * m_tbar_ * qp);
      Eigen::LLT<Matrix> llt(c);
      if (llt.info() != Eigen::Success)
        throw FactorizationFailure("proxy: complement block of M_Tbar is singular");
      e_ = detail::symmetrized(a - b * llt.solve(b.transpose()));
    } else {
      e_ = detail::symmetrized(a);
    }
  }

  const Matrix& m_t() const noexcept { return m_t_; }
  const Matrix& m_tbar() const noexcept { return m_tbar_; }
  /// Numerical rank of U_T; the limit of h as alpha grows.
  Index rank() const noexcept { return rank_; }

  double h(double alpha) const {
    check_alpha(alpha);
    if (rank_ == 0) return 0.0;
    const Eigen::LLT<Matrix> llt = factor(alpha);
    return alpha * llt.solve(n_).trace();
  }

  double h_prime(double alpha) const {
    check_alpha(alpha);
    if (rank_ == 0) return 0.0;
    const Eigen::LLT<Matrix> llt = factor(alpha);
    const Matrix y = llt.solve(n_);
    const Matrix f = llt.solve(e_);
    return (y * f).trace();
  }

 private:
  static void check_alpha(double alpha) {
    if (!(alpha >= 1.0) || !std::isfinite(alpha)) throw PreconditionViolated("proxy: alpha must be finite and >= 1");
  }

  Eigen::LLT<Matrix> factor(double alpha) const {
    Eigen::LLT<Matrix> llt(detail::symmetrized(alpha * n_ + e_));
    if (llt.info() != Eigen::Success) throw FactorizationFailure("proxy: M_Tbar + alpha M_T is singular");
    return llt;
  }

  Matrix m_t_;
  Matrix m_tbar_;
  Matrix n_;
  Matrix e_;
  Index rank_ = 0;
};

inline double proxy_h(const ProxyContext& ctx, double alpha) { return ctx.h(alpha); }
inline double proxy_h_prime(const ProxyContext& ctx, double alpha) { return ctx.h_prime(alpha); }

}  // namespace framescale
