#pragma once

#include <stdexcept>
#include <string>

namespace spincool {

// Bad user input: malformed config file, contradictory keys, out-of-range
// parameters.  The CLI maps this to exit code 2.
struct config_error : std::runtime_error {
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// An iterative routine ran out of budget before reaching its tolerance
// (adaptive quadrature, ODE stepping).  Carries the best estimate so callers
// can report how close we got.  CLI exit code 3.
struct convergence_error : std::runtime_error {
  convergence_error(const std::string& what, double achieved_value,
                    double achieved_error)
      : std::runtime_error(what),
        achieved(achieved_value),
        error_estimate(achieved_error) {}
  double achieved;
  double error_estimate;
};

// Filesystem problems while writing results.  CLI exit code 4.
struct io_error : std::runtime_error {
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace spincool
