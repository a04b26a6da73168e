#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "biaslab/kalman.hpp"
#include "biaslab/lingauss.hpp"
#include "biaslab/policy_sim.hpp"

namespace biaslab {

/// Discrete model fit on windows of `factor` fine steps; theta is B.
struct CoarsenedFamily {
  int factor = 1;
};

/// Continuous-time model fit on the irregular event timeline; theta is G.
struct ContinuousFamily {};

using Family = std::variant<CoarsenedFamily, ContinuousFamily>;

/// "coarsened-01", "coarsened-10", ..., "continuous".
std::string family_label(const Family& family);

/// One model family with every parameter except the input effect fixed at
/// the truth. theta enters the transition means linearly and never touches
/// the covariances.
class EffectModel {
 public:
  /// `truth.G` is ignored; `prior` is the law of X(0), N(0, I) when omitted.
  EffectModel(const ContinuousModel& truth, double step, Family family,
              std::optional<GaussianBelief> prior = std::nullopt);

  const Family& family() const { return family_; }
  Eigen::Index theta_dim() const { return truth_.state_dim(); }
  double step() const { return step_; }
  const DiscreteModel& fine() const { return fine_; }

  /// Filter prior. For coarsened families the stacked belief carries the
  /// X(0) law in its last block, which is the only block Ac reads.
  const GaussianBelief& prior() const { return prior_; }

  /// Filter inputs for one simulated trajectory.
  std::vector<StepInput> inputs(const Trajectory& t) const;

  /// Per-step transitions at `theta` (a single shared one for coarsened families).
  std::vector<Transition> transitions(const Vector& theta, std::span<const StepInput> inputs) const;

  /// Maps theta to the fine-grid effect B = Φ(δ)G; identity for coarsened families.
  const Matrix& effect_jacobian() const { return effect_jacobian_; }

 private:
  ContinuousModel truth_;
  double step_;
  Family family_;
  DiscreteModel fine_;
  Matrix Ac_;
  Matrix Cc_;
  GaussianBelief prior_;
  Matrix effect_jacobian_;
};

/// Per-step model matrices for the effect `theta` under `family`; see
/// EffectModel::transitions.
std::vector<Transition> embed_theta(const Vector& theta, const EffectModel& model,
                                    std::span<const StepInput> inputs);

/// Exact log-likelihood in theta:  c + linearᵀθ − ½ θᵀ information θ.
struct EffectQuadratic {
  double constant = 0.0;
  Vector linear;
  Matrix information;

  double operator()(const Vector& theta) const {
    return constant + linear.dot(theta) - 0.5 * theta.dot(information * theta);
  }
  EffectQuadratic& operator+=(const EffectQuadratic& other);
};

/// Residuals r(θ) and variances S of each measured step, from the filter run
/// at θ; used to reconstruct the quadratic.
std::vector<Innovation> effect_innovations(const EffectModel& model,
                                           std::span<const StepInput> inputs, const Vector& theta);

/// Runs the filter at θ = 0 and at each unit vector and assembles the
/// quadratic from the affine residuals.
EffectQuadratic effect_quadratic(const EffectModel& model, std::span<const StepInput> inputs);

double effect_loglik(const EffectModel& model, std::span<const std::vector<StepInput>> datasets,
                     const Vector& theta);

struct FitResult {
  Vector theta_hat;
  double loglik_at_hat = 0.0;
  Matrix curvature;  // Hessian of the log-likelihood in theta (negative definite)
  std::size_t n_trajectories = 0;
  Vector effect_hat;     // B = Φ(δ)θ̂ (or θ̂ itself for coarsened families)
  Vector effect_stderr;  // from the inverse observed information

  Vector theta_stderr() const;
};

/// Maximizer of the pooled quadratic. Throws RankDeficiencyError when the
/// information matrix is singular (e.g. no action was ever taken).
FitResult fit_effect(const EffectModel& model, std::span<const std::vector<StepInput>> datasets);

struct ConcavityProbe {
  Vector direction;
  double second_difference = 0.0;         // ℓ(v) − 2ℓ(0) + ℓ(−v)
  double second_difference_double = 0.0;  // same at 2v
  bool concave = false;                   // second_difference ≤ 1e-10
  bool quadratic = false;                 // doubled difference / 4 matches to 1e-8 (relative)
};

struct ConcavityReport {
  std::vector<ConcavityProbe> probes;
  bool ok() const;
};

ConcavityReport verify_concavity(const EffectModel& model,
                                 std::span<const std::vector<StepInput>> datasets,
                                 std::span<const Vector> directions);

}  // namespace biaslab
