#pragma once

// Coarse estimate of the sum of small eigenvalues of U_T Z_T U_T^T (UZU^T)^{-1}
// via a determinant local optimum, without an eigendecomposition.

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>

#include "framescale/linalg.hpp"
#include "framescale/proxy.hpp"

namespace framescale {

struct LocalOptResult {
  IndexSet subset;  // ascending original column indices
  int swaps = 0;
  double log_det = 0.0;
};

struct EigenSumEstimate {
  double mu_tilde = 0.0;
  Index p = 0;
  IndexSet D;
};

namespace detail {

inline double principal_logdet(const Matrix& k, const std::vector<Index>& pos) {
  const Index p = static_cast<Index>(pos.size());
  Matrix sub(p, p);
  for (Index a = 0; a < p; ++a)
    for (Index b = 0; b < p; ++b) sub(a, b) = k(pos[static_cast<std::size_t>(a)], pos[static_cast<std::size_t>(b)]);
  return logdet_psd(symmetrized(sub));
}

inline double round_half_away(double x, const char* who) {
  const double fl = std::floor(x);
  if (x - fl == 0.5) throw PreconditionViolated(std::string(who) + ": trace is exactly half-integral");
  return std::round(x);
}

}  // namespace detail

/// Swap-phase bound ceil(log2(2 p binom(|T|, p))) + 1.
inline int local_opt_swap_bound(Index t, Index p) {
  double log2_binom = 0.0;
  for (Index i = 0; i < p; ++i)
    log2_binom += std::log2(static_cast<double>(t - i)) - std::log2(static_cast<double>(i + 1));
  return static_cast<int>(std::ceil(1.0 + std::log2(static_cast<double>(p)) + log2_binom)) + 1;
}

/// 2-approximate local maximum of det(U_D^T (UZU^T)^{-1} U_D Z_D) over p-subsets D of T.
/// Greedy fill followed by best-improvement swaps; ties go to the smallest index.
inline LocalOptResult det_local_opt(const Frame& frame, const Vector& z, const IndexSet& t, Index p,
                                    const GramContext& ctx, double rank_tolerance_scale = 1.0) {
  if (t.empty()) throw PreconditionViolated("det_local_opt: T is empty");
  IndexSet sorted_t = t;
  std::sort(sorted_t.begin(), sorted_t.end());
  const Index rank = numerical_rank(frame.columns(sorted_t), rank_tolerance_scale);
  if (p <= 0 || p >= rank) throw PreconditionViolated("det_local_opt: need 0 < p < rk(U_T)");

  const Matrix v = whitened_columns(frame, z, sorted_t, ctx);
  const Matrix k = detail::symmetrized(v.transpose() * v);
  if (k.trace() < static_cast<double>(p) - 0.5)
    throw PreconditionViolated("det_local_opt: trace below p - 1/2");

  const Index tn = static_cast<Index>(sorted_t.size());
  std::vector<bool> in(static_cast<std::size_t>(tn), false);
  std::vector<Index> chosen;
  for (Index step = 0; step < p; ++step) {
    Index best = -1;
    double best_val = -std::numeric_limits<double>::infinity();
    for (Index i = 0; i < tn; ++i) {
      if (in[static_cast<std::size_t>(i)]) continue;
      chosen.push_back(i);
      const double val = detail::principal_logdet(k, chosen);
      chosen.pop_back();
      if (best < 0 || val > best_val) {
        best = i;
        best_val = val;
      }
    }
    chosen.push_back(best);
    in[static_cast<std::size_t>(best)] = true;
    std::sort(chosen.begin(), chosen.end());
  }

  LocalOptResult out;
  double current = detail::principal_logdet(k, chosen);
  const double threshold = std::log(2.0) + 1e-12;
  for (;;) {
    Index best_out = -1;
    Index best_in = -1;
    double best_val = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < chosen.size(); ++a) {
      for (Index j = 0; j < tn; ++j) {
        if (in[static_cast<std::size_t>(j)]) continue;
        std::vector<Index> trial = chosen;
        trial[a] = j;
        std::sort(trial.begin(), trial.end());
        const double val = detail::principal_logdet(k, trial);
        if (val > best_val) {
          best_val = val;
          best_out = static_cast<Index>(a);
          best_in = j;
        }
      }
    }
    if (best_out < 0 || !(best_val > current + threshold)) break;
    in[static_cast<std::size_t>(chosen[static_cast<std::size_t>(best_out)])] = false;
    in[static_cast<std::size_t>(best_in)] = true;
    chosen[static_cast<std::size_t>(best_out)] = best_in;
    std::sort(chosen.begin(), chosen.end());
    current = best_val;
    ++out.swaps;
  }

  out.log_det = current;
  for (Index pos : chosen) out.subset.push_back(sorted_t[static_cast<std::size_t>(pos)]);
  return out;
}

inline LocalOptResult det_local_opt(const Frame& frame, const Vector& z, const IndexSet& t, Index p) {
  return det_local_opt(frame, z, t, p, GramContext(frame, z));
}

/// mu_tilde with sum_{mu_i < 1/2} mu_i <= mu_tilde <= (1 + 8 n d^2) sum_{mu_i < 1/2} mu_i.
/// Requires h'(1) < 1/4.
inline EigenSumEstimate approx_small_eigen_sum(const Frame& frame, const Vector& z, const IndexSet& t,
                                               const GramContext& ctx, const ProxyContext& proxy,
                                               double rank_tolerance_scale = 1.0) {
  if (!(proxy.h_prime(1.0) < 0.25)) throw PreconditionViolated("approx_small_eigen_sum: h'(1) >= 1/4");
  const Matrix v = whitened_columns(frame, z, t, ctx);
  const double trace = v.squaredNorm();
  EigenSumEstimate out;
  out.p = static_cast<Index>(detail::round_half_away(trace, "approx_small_eigen_sum"));
  const Index rank = proxy.rank();
  if (out.p > rank) throw PreconditionViolated("approx_small_eigen_sum: rounded trace exceeds rk(U_T)");
  if (out.p == rank) return out;
  if (out.p == 0) {
    out.mu_tilde = trace;
    return out;
  }
  out.D = det_local_opt(frame, z, t, out.p, ctx, rank_tolerance_scale).subset;
  const Matrix vd = whitened_columns(frame, z, out.D, ctx);
  if (numerical_rank(vd, rank_tolerance_scale) < out.p)
    throw FactorizationFailure("approx_small_eigen_sum: local optimum columns are dependent");
  Eigen::HouseholderQR<Matrix> qr(vd);
  const Matrix q = qr.householderQ() * Matrix::Identity(vd.rows(), out.p);
  const Matrix residual = v - q * (q.transpose() * v);
  out.mu_tilde = residual.squaredNorm();
  return out;
}

inline EigenSumEstimate approx_small_eigen_sum(const Frame& frame, const Vector& z, const IndexSet& t) {
  const GramContext ctx(frame, z);
  const ProxyContext proxy(frame, z, t);
  return approx_small_eigen_sum(frame, z, t, ctx, proxy);
}

}  // namespace framescale
