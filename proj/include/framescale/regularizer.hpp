#pragma once

// Range control for scalings: shrink oversized gaps between consecutive sorted
// entries, then snap to a grid of multiples of delta.

#include <algorithm>
#include <cmath>
#include <numeric>

#include "framescale/linalg.hpp"

namespace framescale {

/// pinv_trace(U_T^T (UU^T)^{-1} U_T), an overestimate of 1 + rho_T(U) within a factor d.
///
/// The nonzero spectrum is read off the d x d matrix W W^T, W = L^{-1} U_T, keeping the
/// rk(U_T) largest eigenvalues.
inline double rho_overestimate(const Frame& frame, const IndexSet& t, const GramContext& unit_ctx,
                               double rank_tolerance_scale = 1.0) {
  if (t.empty()) throw InvalidInput("rho_overestimate: T is empty");
  const Matrix u_t = frame.columns(t);
  const Index r = numerical_rank(u_t, rank_tolerance_scale);
  if (r == 0) throw InvalidInput("rho_overestimate: U_T is zero");
  const Matrix w = unit_ctx.whiten(u_t);
  Eigen::SelfAdjointEigenSolver<Matrix> es(detail::symmetrized(w * w.transpose()), Eigen::EigenvaluesOnly);
  const Vector& ev = es.eigenvalues();  // ascending
  double acc = 0.0;
  for (Index i = ev.size() - r; i < ev.size(); ++i) {
    if (!(ev(i) > 0.0)) throw FactorizationFailure("rho_overestimate: nonpositive eigenvalue inside the rank");
    acc += 1.0 / ev(i);
  }
  return acc;
}

inline double rho_overestimate(const Frame& frame, const IndexSet& t) {
  return rho_overestimate(frame, t, GramContext(frame, Vector::Ones(frame.n())));
}

struct RegularizeResult {
  Vector z;
  int cuts = 0;               // number of prefix gaps that were shrunk
  double rho_hat_max = 1.0;   // largest cap numerator evaluated (1 when none)
};

/// Permutation sorting z descending; stable.
inline std::vector<Index> descending_order(const Vector& z) {
  std::vector<Index> order(static_cast<std::size_t>(z.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&z](Index a, Index b) { return z(a) > z(b); });
  return order;
}

/// Shared shrink-and-snap pass.
///
/// `cap_numerator(prefix)` returns rho for the sorted prefix (original indices); the
/// ratio between consecutive sorted entries is capped at rho / delta. It is only
/// queried where the ratio exceeds 1/delta, which every cap is at least.
template <class CapNumerator>
RegularizeResult shrink_and_snap(const Vector& z, double delta, CapNumerator&& cap_numerator) {
  if (!(delta > 0.0) || !(delta < 0.5)) throw InvalidInput("regularize: delta must lie in (0, 1/2)");
  const Index n = z.size();
  for (Index j = 0; j < n; ++j)
    if (!(z(j) > 0.0) || !std::isfinite(z(j))) throw InvalidInput("regularize: entries must be positive and finite");

  const std::vector<Index> order = descending_order(z);
  const double zmin = z(order.back());
  RegularizeResult out;
  out.z.resize(n);
  out.z(order.back()) = 1.0;
  IndexSet prefix(order.begin(), order.end() - 1);
  for (Index k = n - 2; k >= 0; --k) {
    const double upper = z(order[static_cast<std::size_t>(k)]) / zmin;
    const double lower = z(order[static_cast<std::size_t>(k + 1)]) / zmin;
    double ratio = upper / lower;
    if (ratio > 1.0 / delta) {
      prefix.resize(static_cast<std::size_t>(k + 1));
      const double rho = cap_numerator(static_cast<const IndexSet&>(prefix));
      out.rho_hat_max = std::max(out.rho_hat_max, rho);
      const double cap = rho / delta;
      if (ratio > cap) {
        ratio = cap;
        ++out.cuts;
      }
    }
    out.z(order[static_cast<std::size_t>(k)]) = out.z(order[static_cast<std::size_t>(k + 1)]) * ratio;
  }
  for (Index j = 0; j < n; ++j) out.z(j) = std::max(std::round(out.z(j) / delta) * delta, delta);
  return out;
}

/// Range-bounded scaling with ||lev(z) - lev(result)||_1 <= 3 n d delta.
inline RegularizeResult regularize_detailed(const Frame& frame, const Vector& z, double delta,
                                            double rank_tolerance_scale = 1.0) {
  require_scaling(frame, z);
  const GramContext unit_ctx(frame, Vector::Ones(frame.n()));
  return shrink_and_snap(z, delta, [&](const IndexSet& prefix) {
    IndexSet t = prefix;
    std::sort(t.begin(), t.end());
    return rho_overestimate(frame, t, unit_ctx, rank_tolerance_scale);
  });
}

inline Vector regularize(const Frame& frame, const Vector& z, double delta) {
  return regularize_detailed(frame, z, delta).z;
}

/// log(max / min) of a positive vector.
inline double log_range(const Vector& z) { return std::log(z.maxCoeff()) - std::log(z.minCoeff()); }

}  // namespace framescale
