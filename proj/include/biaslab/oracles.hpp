#pragma once

// Reference computations that avoid the production code paths: truncated
// series instead of Padé, quadrature instead of Van Loan, explicit unrolling
// of the joint Gaussian instead of recursive filtering.

#include <span>
#include <utility>
#include <vector>

#include "biaslab/kalman.hpp"
#include "biaslab/lingauss.hpp"

namespace biaslab::oracle {

/// Σ_{k ≤ terms} M^k / k!
Matrix taylor_exp(const Matrix& m, int terms = 30);

/// Composite Simpson rule for ∫₀^δ e^{Fu} Q e^{Fᵀu} du, with e^{Fu} from taylor_exp.
Matrix simpson_noise_integral(const Matrix& F, const Matrix& Q, double delta, int panels);

struct Moments {
  Vector mean;
  Matrix cov;
};

/// Joint law of (X_1, ..., X_T) when X_0 ~ prior and
/// X_t = A_t X_{t-1} + B_t u_t + w_t, w_t ~ N(0, C_t). Built by writing every
/// state as an explicit linear map of (X_0, w_1, ..., w_T).
Moments unrolled_state_moments(const GaussianBelief& prior, std::span<const Transition> transitions,
                               std::span<const Vector> controls);

/// A scalar observation y = Σ_terms h · X_t + N(0, noise_var). Steps are 0-based
/// into the unrolled state sequence.
struct LinearObservation {
  std::vector<std::pair<std::size_t, RowVector>> terms;
  double noise_var = 0.0;
  double value = 0.0;
};

/// log N(y; E[y], Cov[y]) for the stacked observations, via a dense Cholesky.
double joint_gaussian_loglik(const Moments& states, Eigen::Index state_dim,
                             std::span<const LinearObservation> observations);

/// Same contract as filter_loglik, evaluated through the dense joint Gaussian.
double joint_gaussian_loglik(const GaussianBelief& prior, std::span<const Transition> transitions,
                             std::span<const StepInput> inputs);

/// Log density of the window-averaged observations, computed on the fine grid:
/// windows of m fine steps, `actions` the fine actions U_0.., `observed` and
/// `values` the fine flags and measurements.
double averaged_observation_loglik(const DiscreteModel& fine, const GaussianBelief& prior, int m,
                                   std::span<const double> actions,
                                   std::span<const std::uint8_t> observed,
                                   std::span<const double> values);

}  // namespace biaslab::oracle
