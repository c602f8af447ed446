#ifndef FPSTEER_ERRORS_HPP
#define FPSTEER_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fpsteer {

/// Violated precondition on an argument (bad order, zero gain, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Iterative or quadrature routine failed to meet its tolerance.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scenario file or configuration block is malformed.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A moment-space plan cannot be realized; carries the offending step.
class PlanningError : public std::runtime_error {
 public:
  PlanningError(int step, const std::string& what)
      : std::runtime_error(what), step_(step) {}
  int step() const noexcept { return step_; }

 private:
  int step_;
};

}  // namespace fpsteer

#endif  // FPSTEER_ERRORS_HPP
