#pragma once

#include <cmath>

#include "framescale/eigen_sum.hpp"
#include "framescale/newton_dinkelbach.hpp"
#include "framescale/proxy.hpp"

namespace framescale {

struct UpdateResult {
  double alpha = 1.0;
  int nd_iterations = 0;
  bool guess_branch = false;  // true when the start came from the small-eigenvalue estimate
  double mu_tilde = 0.0;
  double alpha0 = 1.0;
  double h_one = 0.0;
  double h_prime_one = 0.0;
  double h_alpha = 0.0;
  std::vector<NDIterate> iterates;
};

/// Step size alpha with gamma/5 <= h(alpha) - h(1) <= gamma.
inline UpdateResult compute_update(const Frame& frame, const Vector& z, const IndexSet& t, double gamma,
                                   const GramContext& ctx, double rank_tolerance_scale = 1.0) {
  if (!(gamma > 0.0) || gamma > 1.0) throw PreconditionViolated("compute_update: gamma must lie in (0, 1]");
  const ProxyContext proxy(frame, z, t, rank_tolerance_scale);
  UpdateResult out;
  out.h_one = proxy.h(1.0);
  out.h_prime_one = proxy.h_prime(1.0);

  if (out.h_prime_one < gamma / 4.0) {
    out.guess_branch = true;
    const EigenSumEstimate est = approx_small_eigen_sum(frame, z, t, ctx, proxy, rank_tolerance_scale);
    out.mu_tilde = est.mu_tilde;
    // zero estimate: fall back to a unit start, ND still converges from below
    if (est.mu_tilde > 0.0) out.alpha0 = 1.0 + gamma / (2.0 * est.mu_tilde);
  }

  auto f = [&proxy](double a) { return proxy.h(a); };
  auto fp = [&proxy](double a) { return proxy.h_prime(a); };
  const NDProblem problem{f, fp, out.alpha0, out.h_one + gamma / 5.0, out.h_one + gamma,
                          nd_iteration_cap(frame.n(), frame.d())};
  NDResult nd = newton_dinkelbach(problem);
  out.alpha = nd.alpha;
  out.h_alpha = nd.f;
  out.nd_iterations = nd.iterations;
  out.iterates = std::move(nd.iterates);
  return out;
}

inline UpdateResult compute_update(const Frame& frame, const Vector& z, const IndexSet& t, double gamma) {
  return compute_update(frame, z, t, gamma, GramContext(frame, z));
}

}  // namespace framescale
