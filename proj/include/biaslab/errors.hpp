#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace biaslab {

/// Operands have incompatible shapes.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An argument lies outside the operation's domain (m < 1, index out of range, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation left its numerically valid range, e.g. a vanishing
/// innovation variance in the Kalman update.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The normal equations of an effect fit are singular. `null_direction()`
/// is a unit vector spanning (part of) the unidentified subspace.
class RankDeficiencyError : public std::runtime_error {
 public:
  RankDeficiencyError(const std::string& what, Eigen::VectorXd null_direction)
      : std::runtime_error(what), null_direction_(std::move(null_direction)) {}

  const Eigen::VectorXd& null_direction() const { return null_direction_; }

 private:
  Eigen::VectorXd null_direction_;
};

/// Invalid experiment configuration; the message names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace biaslab
