#include "biaslab/mle.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

namespace biaslab {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

std::string family_label(const Family& family) {
  return std::visit(Overloaded{[](const CoarsenedFamily& f) {
                                 char buf[32];
                                 std::snprintf(buf, sizeof buf, "coarsened-%02d", f.factor);
                                 return std::string(buf);
                               },
                               [](const ContinuousFamily&) { return std::string("continuous"); }},
                    family);
}

EffectModel::EffectModel(const ContinuousModel& truth, double step, Family family,
                         std::optional<GaussianBelief> prior)
    : truth_(truth), step_(step), family_(family), fine_(discretize(truth, step)) {
  const auto d = truth_.state_dim();
  if (truth_.H.rows() != 1) throw DimensionError("EffectModel: requires a scalar measurement");
  const GaussianBelief x0 = prior.value_or(GaussianBelief::standard(d));
  if (x0.mean.size() != d || x0.cov.rows() != d || x0.cov.cols() != d) {
    throw DimensionError("EffectModel: prior dimension mismatch");
  }

  if (const auto* coarse = std::get_if<CoarsenedFamily>(&family_)) {
    const int m = coarse->factor;
    const auto cm = coarsen(fine_, m);
    Ac_ = cm.Ac;
    Cc_ = cm.Cc;
    prior_.mean = Vector::Zero(m * d);
    prior_.cov = Matrix::Zero(m * d, m * d);
    prior_.mean.tail(d) = x0.mean;
    prior_.cov.bottomRightCorner(d, d) = x0.cov;
    effect_jacobian_ = Matrix::Identity(d, d);
  } else {
    prior_ = x0;
    effect_jacobian_ = fine_.A;
  }
}

std::vector<StepInput> EffectModel::inputs(const Trajectory& t) const {
  if (const auto* coarse = std::get_if<CoarsenedFamily>(&family_)) {
    return coarse_step_inputs(coarsen_dataset(t, coarse->factor), fine_);
  }
  return continuous_timeline(t, truth_);
}

std::vector<Transition> EffectModel::transitions(const Vector& theta,
                                                 std::span<const StepInput> inputs) const {
  if (theta.size() != theta_dim()) throw DimensionError("effect theta has the wrong length");
  if (const auto* coarse = std::get_if<CoarsenedFamily>(&family_)) {
    return {Transition{Ac_, stacked_input_matrix(fine_.A, theta, coarse->factor), Cc_}};
  }
  ContinuousModel cm = truth_;
  cm.G = theta;
  return continuous_transitions(cm, inputs);
}

std::vector<Transition> embed_theta(const Vector& theta, const EffectModel& model,
                                    std::span<const StepInput> inputs) {
  return model.transitions(theta, inputs);
}

EffectQuadratic& EffectQuadratic::operator+=(const EffectQuadratic& other) {
  constant += other.constant;
  linear += other.linear;
  information += other.information;
  return *this;
}

std::vector<Innovation> effect_innovations(const EffectModel& model,
                                           std::span<const StepInput> inputs,
                                           const Vector& theta) {
  const auto transitions = model.transitions(theta, inputs);
  return filter_loglik(model.prior(), transitions, inputs).innovations;
}

EffectQuadratic effect_quadratic(const EffectModel& model, std::span<const StepInput> inputs) {
  const auto d = model.theta_dim();
  const auto base = effect_innovations(model, inputs, Vector::Zero(d));
  const auto n = base.size();

  // Row t of `design` is ∂r_t/∂θ.
  Matrix design(static_cast<Eigen::Index>(n), d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const auto shifted = effect_innovations(model, inputs, Vector::Unit(d, j));
    for (std::size_t t = 0; t < n; ++t) {
      if (shifted[t].variance != base[t].variance) {
        throw NumericalError("effect_quadratic: innovation variance depends on theta");
      }
      design(static_cast<Eigen::Index>(t), j) = shifted[t].residual - base[t].residual;
    }
  }

  EffectQuadratic q{0.0, Vector::Zero(d), Matrix::Zero(d, d)};
  for (std::size_t t = 0; t < n; ++t) {
    const double r = base[t].residual;
    const double s = base[t].variance;
    const auto row = design.row(static_cast<Eigen::Index>(t));
    q.constant -= 0.5 * (std::log(2.0 * std::numbers::pi * s) + r * r / s);
    q.linear -= row.transpose() * (r / s);
    q.information += row.transpose() * row / s;
  }
  q.information = 0.5 * (q.information + q.information.transpose());
  return q;
}

double effect_loglik(const EffectModel& model, std::span<const std::vector<StepInput>> datasets,
                     const Vector& theta) {
  double total = 0.0;
  for (const auto& inputs : datasets) {
    const auto transitions = model.transitions(theta, inputs);
    total += filter_loglik(model.prior(), transitions, inputs).loglik;
  }
  return total;
}

Vector FitResult::theta_stderr() const {
  const Matrix cov = (-curvature).inverse();
  return cov.diagonal().cwiseSqrt();
}

FitResult fit_effect(const EffectModel& model, std::span<const std::vector<StepInput>> datasets) {
  if (datasets.empty()) throw DomainError("fit_effect: no trajectories");
  const auto d = model.theta_dim();
  EffectQuadratic total{0.0, Vector::Zero(d), Matrix::Zero(d, d)};
  for (const auto& inputs : datasets) total += effect_quadratic(model, inputs);

  Eigen::SelfAdjointEigenSolver<Matrix> es(total.information);
  const double largest = es.eigenvalues().maxCoeff();
  const double smallest = es.eigenvalues().minCoeff();
  if (!(largest > 0.0) || smallest <= 1e-12 * largest) {
    throw RankDeficiencyError(
        "fit_effect: effect is not identified (singular normal equations, smallest eigenvalue " +
            std::to_string(smallest) + ")",
        es.eigenvectors().col(0));
  }

  FitResult fit;
  fit.theta_hat = total.information.ldlt().solve(total.linear);
  fit.loglik_at_hat = total(fit.theta_hat);
  fit.curvature = -total.information;
  fit.n_trajectories = datasets.size();

  const Matrix& jac = model.effect_jacobian();
  const Matrix theta_cov = total.information.inverse();
  fit.effect_hat = jac * fit.theta_hat;
  fit.effect_stderr = (jac * theta_cov * jac.transpose()).diagonal().cwiseSqrt();
  return fit;
}

bool ConcavityReport::ok() const {
  for (const auto& p : probes)
    if (!p.concave || !p.quadratic) return false;
  return true;
}

ConcavityReport verify_concavity(const EffectModel& model,
                                 std::span<const std::vector<StepInput>> datasets,
                                 std::span<const Vector> directions) {
  const Vector zero = Vector::Zero(model.theta_dim());
  const double at_zero = effect_loglik(model, datasets, zero);
  auto second_difference = [&](const Vector& v) {
    return effect_loglik(model, datasets, v) - 2.0 * at_zero + effect_loglik(model, datasets, -v);
  };

  ConcavityReport report;
  for (const auto& v : directions) {
    ConcavityProbe p;
    p.direction = v;
    p.second_difference = second_difference(v);
    p.second_difference_double = second_difference(2.0 * v);
    p.concave = p.second_difference <= 1e-10;
    p.quadratic = std::abs(p.second_difference_double / 4.0 - p.second_difference) <=
                  1e-8 * std::max(1.0, std::abs(p.second_difference));
    report.probes.push_back(std::move(p));
  }
  return report;
}

}  // namespace biaslab
