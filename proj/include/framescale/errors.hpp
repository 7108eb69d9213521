#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "framescale/trace.hpp"

namespace framescale {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-contract input (dimensions, non-finite entries, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A Cholesky-type factorization failed; the matrix is numerically singular.
class FactorizationFailure : public Error {
 public:
  using Error::Error;
};

class NotSymmetric : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an algorithm did not hold.
class PreconditionViolated : public Error {
 public:
  using Error::Error;
};

/// Zero margin on a nonzero error vector; impossible when the errors sum to zero.
class DegenerateMargin : public Error {
 public:
  using Error::Error;
};

class DerivativeVanished : public Error {
 public:
  using Error::Error;
};

/// The target band of the piecewise-linear matrix proxy is above its supremum.
class InfeasibleSegment : public Error {
 public:
  using Error::Error;
};

class ZeroRowSum : public Error {
 public:
  using Error::Error;
};

class NotSeparable : public Error {
 public:
  using Error::Error;
};

/// An iteration cap was hit. Carries whatever trace was recorded so far.
class IterationCapExceeded : public Error {
 public:
  IterationCapExceeded(const std::string& what, std::vector<IterationRecord> trace = {})
      : Error(what), trace_(std::move(trace)) {}

  const std::vector<IterationRecord>& trace() const noexcept { return trace_; }

 private:
  std::vector<IterationRecord> trace_;
};

}  // namespace framescale
