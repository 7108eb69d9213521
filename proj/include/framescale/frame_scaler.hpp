#pragma once

// Frame scaling main loop: margin-set selection, infeasibility check, step
// computation and regularization until ||lev(z) - c||^2 <= eps^2.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "framescale/regularizer.hpp"
#include "framescale/trace.hpp"
#include "framescale/update.hpp"

namespace framescale {

/// Certificate slack: rk(U_T) < c(T) - kCertificateSlack.
inline constexpr double kCertificateSlack = 1e-7;

/// Checks positivity, finiteness and <c, 1> = target within 1e-9 * target.
inline void validate_marginals(const Vector& c, double target, const char* who = "marginals") {
  if (c.size() == 0) throw InvalidInput(std::string(who) + ": empty");
  for (Index j = 0; j < c.size(); ++j)
    if (!(c(j) > 0.0) || !std::isfinite(c(j))) throw InvalidInput(std::string(who) + ": entries must be positive and finite");
  if (std::abs(c.sum() - target) > 1e-9 * target)
    throw InvalidInput(std::string(who) + ": entries do not sum to " + std::to_string(target));
}

struct MarginSet {
  std::vector<Index> order;  // permutation sorting lev - c ascending
  Index k = 0;               // T = order[0..k)
  double gamma = 0.0;
  double nu = 0.0;

  /// T in ascending index order.
  IndexSet set() const {
    IndexSet t(order.begin(), order.begin() + k);
    std::sort(t.begin(), t.end());
    return t;
  }
};

/// Prefix set with the largest gap in the sorted errors x = lev - c.
inline MarginSet select_margin_set(const Vector& lev, const Vector& c, double sum_tolerance = 1e-8) {
  const Index n = lev.size();
  if (n < 2 || c.size() != n) throw InvalidInput("select_margin_set: need n >= 2 and matching lengths");
  const Vector x = lev - c;
  if (std::abs(x.sum()) > sum_tolerance) throw PreconditionViolated("select_margin_set: errors do not sum to zero");

  MarginSet m;
  m.order.resize(static_cast<std::size_t>(n));
  std::iota(m.order.begin(), m.order.end(), Index{0});
  std::stable_sort(m.order.begin(), m.order.end(), [&x](Index a, Index b) { return x(a) < x(b); });

  double best_gap = -1.0;
  for (Index j = 0; j + 1 < n; ++j) {
    const double lo = x(m.order[static_cast<std::size_t>(j)]);
    const double hi = x(m.order[static_cast<std::size_t>(j + 1)]);
    if (hi - lo > best_gap) {
      best_gap = hi - lo;
      m.k = j + 1;
      m.gamma = (hi - lo) / 2.0;
      m.nu = (hi + lo) / 2.0;
    }
  }
  if (m.gamma == 0.0 && x.squaredNorm() > 0.0) throw DegenerateMargin("select_margin_set: zero margin on nonzero errors");
  return m;
}

/// T itself when c(T) exceeds rk(U_T) by more than the certificate slack.
inline std::optional<IndexSet> check_infeasibility(const Frame& frame, const Vector& c, const IndexSet& t,
                                                   double rank_tolerance_scale = 1.0) {
  if (t.empty()) return std::nullopt;
  double mass = 0.0;
  for (Index j : t) mass += c(j);
  const auto rank = static_cast<double>(numerical_rank(frame.columns(t), rank_tolerance_scale));
  if (rank < mass - kCertificateSlack) return t;
  return std::nullopt;
}

struct SolverConfig {
  std::int64_t max_iters = 0;  // 0: ceil(40 n^3 ln(max(n,2)/eps))
  double rank_tolerance_scale = 1.0;
  bool record_trace = true;
  bool regularize = true;  // off only for test harnesses
  bool audit = false;      // also record the error right after each step
};

enum class Status { Scaled, Infeasible };

struct ScalingResult {
  Status status = Status::Scaled;
  Vector z;              // final scaling (Scaled) or the scaling when the certificate fired
  IndexSet certificate;  // ascending (Infeasible)
  std::vector<IterationRecord> trace;
  std::int64_t iterations = 0;
  double final_error_sq = 0.0;
};

inline std::int64_t default_max_iters(Index n, double eps) {
  const double nn = static_cast<double>(n);
  return static_cast<std::int64_t>(std::ceil(40.0 * nn * nn * nn * std::log(std::max(nn, 2.0) / eps)));
}

/// delta = gamma / (15 n^{5/2} d)
inline double frame_delta(double gamma, Index n, Index d) {
  return gamma / (15.0 * std::pow(static_cast<double>(n), 2.5) * static_cast<double>(d));
}

inline ScalingResult run(const Frame& frame, const Vector& c, double eps, const SolverConfig& config = {}) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidInput("run: eps must be positive");
  if (c.size() != frame.n()) throw InvalidInput("run: marginals length does not match frame");
  validate_marginals(c, static_cast<double>(frame.d()));
  const Index n = frame.n();
  const Index d = frame.d();
  const std::int64_t cap = config.max_iters > 0 ? config.max_iters : default_max_iters(n, eps);

  ScalingResult res;
  res.z = Vector::Ones(n);
  for (Index j = 0; j < n; ++j) {
    if (c(j) > 1.0 + kCertificateSlack) {
      res.status = Status::Infeasible;
      res.certificate = {j};
      res.final_error_sq = (leverage_scores(frame, res.z) - c).squaredNorm();
      return res;
    }
  }

  for (;;) {
    const GramContext ctx(frame, res.z);
    const Vector lev = leverage_scores(frame, res.z, ctx);
    const double err_sq = (lev - c).squaredNorm();
    res.final_error_sq = err_sq;
    if (err_sq <= eps * eps) return res;
    if (res.iterations >= cap)
      throw IterationCapExceeded("run: iteration cap " + std::to_string(cap) + " exceeded", std::move(res.trace));
    if (n < 2) throw InvalidInput("run: a single column cannot carry a nonzero error");

    const MarginSet margin = select_margin_set(lev, c);
    const IndexSet t = margin.set();
    if (auto cert = check_infeasibility(frame, c, t, config.rank_tolerance_scale)) {
      res.status = Status::Infeasible;
      res.certificate = *cert;
      return res;
    }

    IterationRecord rec;
    rec.error_sq = err_sq;
    rec.gamma = margin.gamma;
    rec.set_size = static_cast<std::int64_t>(t.size());

    const UpdateResult up = compute_update(frame, res.z, t, std::min(margin.gamma, 1.0), ctx, config.rank_tolerance_scale);
    rec.alpha_hat = up.alpha;
    rec.progress = up.h_alpha - up.h_one;
    rec.nd_iters = up.nd_iterations;
    rec.h_prime_one = up.h_prime_one;
    rec.guess_branch = up.guess_branch;

    Vector next = res.z;
    for (Index j : t) next(j) *= up.alpha;
    rec.log_range_pre_reg = log_range(next);
    if (config.audit) rec.error_sq_pre_reg = (leverage_scores(frame, next) - c).squaredNorm();

    if (config.regularize) {
      rec.delta = frame_delta(margin.gamma, n, d);
      RegularizeResult reg = regularize_detailed(frame, next, rec.delta, config.rank_tolerance_scale);
      rec.regularized = reg.cuts > 0;
      next = std::move(reg.z);
    }
    next /= next.minCoeff();
    rec.log_range = log_range(next);
    res.z = std::move(next);
    ++res.iterations;
    if (config.record_trace) res.trace.push_back(rec);
  }
}

}  // namespace framescale
