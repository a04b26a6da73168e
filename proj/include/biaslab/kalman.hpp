#pragma once

#include <optional>
#include <span>
#include <vector>

#include "biaslab/lingauss.hpp"

namespace biaslab {

struct GaussianBelief {
  Vector mean;
  Matrix cov;

  static GaussianBelief standard(Eigen::Index dim) {
    return {Vector::Zero(dim), Matrix::Identity(dim, dim)};
  }
};

/// One transition X' = A X + B u + N(0, C).
struct Transition {
  Matrix A;
  Matrix B;
  Matrix C;
};

/// Scalar measurement y = Hrow X + N(0, Rvar).
struct MeasurementModel {
  RowVector Hrow;
  double Rvar = 0.0;
};

/// Filter input for one step: the control applied on the transition into the
/// step, and an optional measurement taken after it. `gap` is the elapsed time
/// since the previous step; only the continuous-time filter reads it.
struct StepInput {
  Vector control;
  std::optional<double> measurement;
  std::optional<MeasurementModel> measurement_model;
  double gap = 1.0;
};

struct Innovation {
  double residual = 0.0;
  double variance = 0.0;
};

struct FilterResult {
  double loglik = 0.0;
  std::vector<Innovation> innovations;  // one per measured step, in order
  GaussianBelief final_belief;
};

struct UpdateResult {
  GaussianBelief belief;
  double loglik_increment = 0.0;
  Innovation innovation;
};

/// Innovation variances below this abort the update.
inline constexpr double kMinInnovationVariance = 1e-300;

GaussianBelief kf_predict(const GaussianBelief& belief, const Matrix& A, const Matrix& B,
                          const Matrix& C, const Vector& control);

/// Conditions on y ~ N(Hrow x, Rvar). Throws NumericalError when the innovation
/// variance is not above kMinInnovationVariance.
UpdateResult kf_update(const GaussianBelief& belief, const RowVector& Hrow, double Rvar, double y);

/// Predict/update over `inputs`. `transitions` holds one entry per input, or a
/// single entry used for every step. Steps without a measurement only predict.
FilterResult filter_loglik(const GaussianBelief& prior, std::span<const Transition> transitions,
                           std::span<const StepInput> inputs);

/// Exact transitions of the continuous model over each input's gap, with the
/// impulse applied at the start of the gap: (e^{F g}, e^{F g} G, ∫₀^g ...).
/// Transitions for repeated gaps are computed once.
std::vector<Transition> continuous_transitions(const ContinuousModel& cm,
                                               std::span<const StepInput> timeline);

FilterResult continuous_filter_loglik(const ContinuousModel& cm, const GaussianBelief& prior,
                                      std::span<const StepInput> timeline);

}  // namespace biaslab
