#ifndef ROBUST_SBL_ERROR_HPP
#define ROBUST_SBL_ERROR_HPP

#include <stdexcept>
#include <string>

namespace robust_sbl {

/// Raised when a caller violates an operation's preconditions.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an iterative routine produces non-finite values or cannot
/// restore positive definiteness. Carries the iteration at which it happened.
class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(const std::string& what, int iteration)
      : std::runtime_error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}

  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

}  // namespace robust_sbl

#endif  // ROBUST_SBL_ERROR_HPP
