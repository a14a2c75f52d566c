#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace lorenzfit {

// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A moment, Lorenz curve or inequality measure that does not exist for the
// given parameters (e.g. GB2 with q <= 1/a has no finite mean).
class ExistenceError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// An iterative method failed to converge.  For the root finders this signals
// a bug rather than a data condition.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data violating one or more invariants.  Every violation is listed.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(std::vector<std::string> problems)
      : std::invalid_argument(join(problems)), problems_(std::move(problems)) {}

  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& problems) {
    std::string out;
    for (const auto& p : problems) {
      if (!out.empty()) out += "; ";
      out += p;
    }
    return out;
  }

  std::vector<std::string> problems_;
};

}  // namespace lorenzfit
