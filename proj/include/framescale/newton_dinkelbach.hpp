#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "framescale/errors.hpp"

namespace framescale {

/// Derivatives at or below this are treated as zero.
inline constexpr double kDerivativeFloor = 1e-14;

/// Target band [b_low, b_high] for an increasing concave f, started at alpha0.
template <class F, class FPrime>
struct NDProblem {
  F f;
  FPrime f_prime;
  double alpha0 = 1.0;
  double b_low = 0.0;
  double b_high = 0.0;
  int max_iters = 64;
};

template <class F, class FPrime>
NDProblem(F, FPrime, double, double, double, int) -> NDProblem<F, FPrime>;

struct NDIterate {
  double alpha;
  double f;
  double f_prime;  // derivative at alpha; NaN for the accepted final iterate
};

struct NDResult {
  double alpha = 1.0;
  double f = 0.0;
  int iterations = 0;
  std::vector<NDIterate> iterates;
};

/// Newton steps aimed at b_high: alpha += (b_high - f(alpha)) / f'(alpha),
/// stopping at the first iterate with f(alpha) >= b_low.
template <class F, class FPrime>
NDResult newton_dinkelbach(const NDProblem<F, FPrime>& problem) {
  if (!(problem.b_low < problem.b_high)) throw PreconditionViolated("newton_dinkelbach: need b_low < b_high");
  NDResult out;
  double alpha = problem.alpha0;
  double fa = problem.f(alpha);
  if (fa > problem.b_high + 1e-9) throw PreconditionViolated("newton_dinkelbach: f(alpha0) exceeds b_high");

  while (fa < problem.b_low) {
    if (out.iterations >= problem.max_iters)
      throw IterationCapExceeded("newton_dinkelbach: iteration cap " + std::to_string(problem.max_iters) + " exceeded");
    const double fp = problem.f_prime(alpha);
    out.iterates.push_back({alpha, fa, fp});
    if (!(fp > kDerivativeFloor)) throw DerivativeVanished("newton_dinkelbach: derivative vanished before reaching b_low");
    alpha += (problem.b_high - fa) / fp;
    fa = problem.f(alpha);
    ++out.iterations;
  }
  out.iterates.push_back({alpha, fa, std::nan("")});
  out.alpha = alpha;
  out.f = fa;
  return out;
}

/// ceil(12 log2(n d)) + 8
inline int nd_iteration_cap(long long n, long long d) {
  const double nd = static_cast<double>(n) * static_cast<double>(d);
  return static_cast<int>(std::ceil(12.0 * std::log2(std::max(nd, 1.0)))) + 8;
}

}  // namespace framescale
