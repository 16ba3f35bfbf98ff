#pragma once

#include <stdexcept>
#include <string>

namespace featlab {

/// Sizes or dimensions outside an operation's precondition (e.g. d < 2, odd d).
class InvalidDimension : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain (|t| > 1, off-sphere kernel inputs).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class DegenerateTarget : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateFeature : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operation was applied to a NetworkState in the wrong training stage.
class WrongStage : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Gradient descent diverged (objective increased for too many consecutive steps).
class StepSizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two independent evaluations of the same quantity disagree.
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Quadrature failed to converge under node doubling; keeps both last estimates.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double coarse, double fine)
      : std::runtime_error(what + " (estimates " + std::to_string(coarse) + " vs " +
                           std::to_string(fine) + ")"),
        coarse_(coarse),
        fine_(fine) {}
  double coarse() const noexcept { return coarse_; }
  double fine() const noexcept { return fine_; }

 private:
  double coarse_;
  double fine_;
};

}  // namespace featlab
