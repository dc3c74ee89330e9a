#pragma once

#include <stdexcept>
#include <string>

namespace wavectl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: malformed config, out-of-range parameter, invalid geometry.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A checked precondition of an analytic result does not hold (e.g. T <= T0).
class Inapplicable : public Error {
 public:
  using Error::Error;
};

// Solver breakdown: NaN/Inf, non-convergence, loss of positivity.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace wavectl
