#pragma once

#include <stdexcept>
#include <string>

namespace hcn {

// A malformed network document or a violated model invariant.
struct SpecError : std::runtime_error {
  explicit SpecError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure: non-convergence, divergence, overflow.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// An operation called outside its contract (e.g. asking for the stationary
// covariance of a network whose invariant measure is not unique).
struct PreconditionError : std::runtime_error {
  explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hcn
