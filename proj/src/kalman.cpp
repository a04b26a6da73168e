#include "biaslab/kalman.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <string>

namespace biaslab {

GaussianBelief kf_predict(const GaussianBelief& belief, const Matrix& A, const Matrix& B,
                          const Matrix& C, const Vector& control) {
  const auto d = belief.mean.size();
  if (A.rows() != A.cols() || A.cols() != d || C.rows() != A.rows() || C.cols() != A.rows() ||
      B.rows() != A.rows() || B.cols() != control.size() || belief.cov.rows() != d ||
      belief.cov.cols() != d) {
    throw DimensionError("kf_predict: dimension mismatch");
  }
  GaussianBelief out;
  out.mean = A * belief.mean + B * control;
  const Matrix cov = A * belief.cov * A.transpose() + C;
  out.cov = 0.5 * (cov + cov.transpose());
  return out;
}

UpdateResult kf_update(const GaussianBelief& belief, const RowVector& Hrow, double Rvar, double y) {
  if (Hrow.size() != belief.mean.size()) throw DimensionError("kf_update: Hrow length mismatch");
  const Vector cov_h = belief.cov * Hrow.transpose();
  const double variance = Hrow.dot(cov_h) + Rvar;
  if (!(variance > kMinInnovationVariance) || !std::isfinite(variance)) {
    throw NumericalError("kf_update: innovation variance " + std::to_string(variance) +
                         " is not positive");
  }
  const double residual = y - Hrow.dot(belief.mean);
  const Vector gain = cov_h / variance;

  UpdateResult out;
  out.belief.mean = belief.mean + gain * residual;
  const Matrix cov = belief.cov - gain * cov_h.transpose();
  out.belief.cov = 0.5 * (cov + cov.transpose());
  out.innovation = {residual, variance};
  out.loglik_increment =
      -0.5 * (std::log(2.0 * std::numbers::pi * variance) + residual * residual / variance);
  return out;
}

FilterResult filter_loglik(const GaussianBelief& prior, std::span<const Transition> transitions,
                           std::span<const StepInput> inputs) {
  if (transitions.size() != 1 && transitions.size() != inputs.size()) {
    throw DimensionError("filter_loglik: " + std::to_string(transitions.size()) +
                         " transitions for " + std::to_string(inputs.size()) + " steps");
  }
  FilterResult result;
  GaussianBelief belief = prior;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Transition& tr = transitions.size() == 1 ? transitions[0] : transitions[k];
    const StepInput& in = inputs[k];
    belief = kf_predict(belief, tr.A, tr.B, tr.C, in.control);
    if (in.measurement.has_value() != in.measurement_model.has_value()) {
      throw DomainError("filter_loglik: step " + std::to_string(k) +
                        " has a measurement without a measurement model (or vice versa)");
    }
    if (!in.measurement) continue;
    auto upd = kf_update(belief, in.measurement_model->Hrow, in.measurement_model->Rvar,
                         *in.measurement);
    belief = std::move(upd.belief);
    result.loglik += upd.loglik_increment;
    result.innovations.push_back(upd.innovation);
  }
  result.final_belief = std::move(belief);
  return result;
}

std::vector<Transition> continuous_transitions(const ContinuousModel& cm,
                                               std::span<const StepInput> timeline) {
  std::map<double, std::pair<Matrix, Matrix>> cache;  // gap -> (Φ, C)
  std::vector<Transition> out;
  out.reserve(timeline.size());
  for (const auto& in : timeline) {
    if (!(in.gap > 0.0)) throw DomainError("continuous filter: gaps must be positive");
    auto it = cache.find(in.gap);
    if (it == cache.end()) {
      Matrix phi = matrix_exp(cm.F * in.gap);
      Matrix noise = noise_integral(cm.F, cm.Q, in.gap);
      it = cache.emplace(in.gap, std::pair{std::move(phi), std::move(noise)}).first;
    }
    const auto& [phi, noise] = it->second;
    out.push_back({phi, phi * cm.G, noise});
  }
  return out;
}

FilterResult continuous_filter_loglik(const ContinuousModel& cm, const GaussianBelief& prior,
                                      std::span<const StepInput> timeline) {
  const auto transitions = continuous_transitions(cm, timeline);
  return filter_loglik(prior, transitions, timeline);
}

}  // namespace biaslab
