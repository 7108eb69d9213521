#pragma once

#include <cstdint>

namespace framescale {

/// One outer iteration of a scaling run.
///
/// The first six fields form the public trace schema. The remaining ones are
/// diagnostics used by the property and acceptance suites.
struct IterationRecord {
  double error_sq = 0.0;   // squared marginal error at the start of the iteration
  double gamma = 0.0;      // margin of the selected prefix set
  double alpha_hat = 1.0;  // multiplicative step applied to the set
  double progress = 0.0;   // proxy increase h(alpha_hat) - h(1)
  int nd_iters = 0;        // Newton-Dinkelbach iterations (0 for the matrix solver)
  bool regularized = false;  // true when at least one prefix gap was shrunk

  // diagnostics
  std::int64_t set_size = 0;
  double h_prime_one = 0.0;
  bool guess_branch = false;
  double delta = 0.0;
  double error_sq_pre_reg = -1.0;  // error after the step, before regularization (audit mode)
  double log_range_pre_reg = 0.0;  // log(max/min) of the scaling after the step
  double log_range = 0.0;          // log(max/min) after regularization
};

}  // namespace framescale
