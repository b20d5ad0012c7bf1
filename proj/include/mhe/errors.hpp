#ifndef MHE_ERRORS_HPP
#define MHE_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace mhe {

// Invalid dimensions, malformed configuration, out-of-range parameters.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

// Base class for runtime numerical failures.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

// An iterative solver ran out of iterations. Carries the last iterate and the
// residual norm it reached so callers can inspect how close it got.
class ConvergenceError : public NumericError {
 public:
  ConvergenceError(const std::string& what_arg, int iterations, double residual,
                   std::vector<double> last_iterate)
      : NumericError(what_arg),
        iterations(iterations),
        residual(residual),
        last_iterate(std::move(last_iterate)) {}
  int iterations;
  double residual;
  std::vector<double> last_iterate;
};

// Every particle weight underflowed to zero.
class DegeneracyError : public NumericError {
 public:
  DegeneracyError(const std::string& what_arg, double min_cost)
      : NumericError(what_arg), min_cost(min_cost) {}
  double min_cost;
};

// Pushforward mass left the grid beyond the allowed fraction.
class GridEscapeError : public NumericError {
 public:
  GridEscapeError(const std::string& what_arg, double lost_mass)
      : NumericError(what_arg), lost_mass(lost_mass) {}
  double lost_mass;
};

// A requested certificate (step-size window, privacy budget) does not exist.
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

}  // namespace mhe

#endif  // MHE_ERRORS_HPP
