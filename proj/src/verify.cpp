#include "biaslab/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>

#include "biaslab/harness.hpp"
#include "biaslab/kalman.hpp"
#include "biaslab/mle.hpp"
#include "biaslab/oracles.hpp"
#include "biaslab/policy_sim.hpp"
#include "biaslab/rng.hpp"

namespace biaslab {

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

CheckResult timed(std::string name, const std::function<std::pair<bool, std::string>()>& body) {
  const auto start = std::chrono::steady_clock::now();
  CheckResult out;
  out.name = std::move(name);
  try {
    std::tie(out.passed, out.detail) = body();
  } catch (const std::exception& e) {
    out.passed = false;
    out.detail = std::string("exception: ") + e.what();
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

// Stable F (negative definite symmetric part), full-rank Q, scalar measurement.
ContinuousModel random_continuous(Rng& rng, Eigen::Index d) {
  const Matrix m = random_matrix(rng, d, d);
  const Matrix skew = random_matrix(rng, d, d);
  const Matrix l = random_matrix(rng, d, d) * 0.3;
  ContinuousModel cm;
  cm.F = -(m * m.transpose() / d + 0.2 * Matrix::Identity(d, d)) + (skew - skew.transpose()) / 2;
  cm.G = random_matrix(rng, d, 1);
  cm.Q = l * l.transpose();
  cm.H = random_matrix(rng, 1, d);
  cm.R = Matrix::Constant(1, 1, 0.01 + rng.uniform() * 0.1);
  return cm;
}

GaussianBelief random_belief(Rng& rng, Eigen::Index d) {
  const Matrix l = random_matrix(rng, d, d);
  return {random_matrix(rng, d, 1), l * l.transpose() + 0.1 * Matrix::Identity(d, d)};
}

std::vector<StepInput> random_inputs(Rng& rng, std::size_t n, const DiscreteModel& dm,
                                     double p_observe) {
  std::vector<StepInput> inputs(n);
  for (auto& in : inputs) {
    in.control = Vector::Constant(1, rng.bernoulli(0.5) ? 1.0 : 0.0);
    in.gap = dm.step;
    if (rng.bernoulli(p_observe)) in.measurement_model = MeasurementModel{dm.H.row(0), dm.R(0, 0)};
  }
  return inputs;
}

// Fills the measured steps with a draw from the model itself.
void sample_measurements(Rng& rng, const GaussianBelief& prior,
                         std::span<const Transition> transitions, std::vector<StepInput>& inputs) {
  auto draw = [&](const Matrix& cov) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
    Vector z(cov.rows());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
    return Vector(es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() * z);
  };
  Vector x = prior.mean + draw(prior.cov);
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    const Transition& tr = transitions.size() == 1 ? transitions[0] : transitions[t];
    x = tr.A * x + tr.B * inputs[t].control + draw(tr.C);
    if (inputs[t].measurement_model) {
      const auto& mm = *inputs[t].measurement_model;
      inputs[t].measurement = mm.Hrow.dot(x) + std::sqrt(mm.Rvar) * rng.normal();
    }
  }
}

std::vector<std::vector<StepInput>> simulate_inputs(const EffectModel& model,
                                                    const ExperimentConfig& config, double beta1) {
  PolicyParams policy = config.policy;
  policy.beta1 = beta1;
  const GaussianBelief x0 = GaussianBelief::standard(2);
  std::vector<std::vector<StepInput>> out;
  for (std::size_t i = 0; i < config.n_trajectories; ++i) {
    const auto t = simulate_trajectory(model.fine(), policy, config.n_steps, x0,
                                       trajectory_seed(config.master_seed, i));
    out.push_back(model.inputs(t));
  }
  return out;
}

}  // namespace

CheckResult check_discretization() {
  return timed("discretization vs Taylor series and Simpson quadrature", [] {
    const ContinuousModel spring = ExperimentConfig{}.spring_model();
    const double delta = 0.1;
    const DiscreteModel dm = discretize(spring, delta);
    const double err_a = max_abs_diff(dm.A, oracle::taylor_exp(spring.F * delta, 30));
    const double err_c =
        max_abs_diff(dm.C, oracle::simpson_noise_integral(spring.F, spring.Q, delta, 10000));
    return std::pair{err_a <= 1e-10 && err_c <= 1e-10,
                     "max|A-taylor|=" + sci(err_a) + " max|C-simpson|=" + sci(err_c)};
  });
}

CheckResult check_coarsening() {
  return timed("coarse one-step prediction vs fine unrolling, m in {2,3,5,10}", [] {
    Rng rng(7);
    std::vector<DiscreteModel> models{discretize(ExperimentConfig{}.spring_model(), 0.1)};
    for (Eigen::Index d : {2, 3}) models.push_back(discretize(random_continuous(rng, d), 0.3));

    double worst = 0.0;
    for (const auto& dm : models) {
      const auto d = dm.state_dim();
      for (int m : {2, 3, 5, 10}) {
        const auto coarse = coarsen(dm, m);
        const GaussianBelief x0 = random_belief(rng, d);
        std::vector<Vector> controls;
        Vector stacked_controls(m);
        for (int i = 0; i < m; ++i) {
          stacked_controls(i) = rng.bernoulli(0.5) ? 1.0 : 0.0;
          controls.push_back(Vector::Constant(1, stacked_controls(i)));
        }
        const Transition fine{dm.A, dm.B, dm.C};
        const auto truth = oracle::unrolled_state_moments(x0, std::span(&fine, 1), controls);

        GaussianBelief stacked{Vector::Zero(m * d), Matrix::Zero(m * d, m * d)};
        stacked.mean.tail(d) = x0.mean;
        stacked.cov.bottomRightCorner(d, d) = x0.cov;
        const auto pred = kf_predict(stacked, coarse.Ac, coarse.Bc, coarse.Cc, stacked_controls);
        worst = std::max({worst, max_abs_diff(pred.mean, truth.mean),
                          max_abs_diff(pred.cov, truth.cov)});
      }
    }
    return std::pair{worst <= 1e-9, "max entrywise error " + sci(worst)};
  });
}

CheckResult check_filter() {
  return timed("filter log-likelihood vs joint Gaussian density", [] {
    Rng rng(11);
    double worst = 0.0;
    int cases = 0;
    std::vector<ContinuousModel> models{ExperimentConfig{}.spring_model()};
    for (int i = 0; i < 3; ++i) models.push_back(random_continuous(rng, 2 + i % 2));
    for (const auto& cm : models) {
      const DiscreteModel dm = discretize(cm, 0.2);
      const Transition tr{dm.A, dm.B, dm.C};
      for (std::size_t T = 1; T <= 5; ++T) {
        for (double p_observe : {1.0, 0.5}) {
          const auto prior = random_belief(rng, dm.state_dim());
          auto inputs = random_inputs(rng, T, dm, p_observe);
          sample_measurements(rng, prior, std::span(&tr, 1), inputs);
          const double got = filter_loglik(prior, std::span(&tr, 1), inputs).loglik;
          const double want = oracle::joint_gaussian_loglik(prior, std::span(&tr, 1), inputs);
          worst = std::max(worst, std::abs(got - want));
          ++cases;
        }
      }
      // Irregular gaps through the continuous-time filter.
      auto inputs = random_inputs(rng, 4, dm, 0.75);
      for (auto& in : inputs) in.gap = 0.05 + rng.uniform();
      const auto prior = random_belief(rng, dm.state_dim());
      sample_measurements(rng, prior, continuous_transitions(cm, inputs), inputs);
      const double got = continuous_filter_loglik(cm, prior, inputs).loglik;
      const double want =
          oracle::joint_gaussian_loglik(prior, continuous_transitions(cm, inputs), inputs);
      worst = std::max(worst, std::abs(got - want));
      ++cases;
    }
    return std::pair{worst <= 1e-9,
                     std::to_string(cases) + " sequences, max |error| " + sci(worst)};
  });
}

CheckResult check_concavity() {
  return timed("effect log-likelihood is a concave quadratic", [] {
    ExperimentConfig config;
    config.n_trajectories = 20;
    config.n_steps = 200;
    const ContinuousModel truth = config.spring_model();
    const std::vector<Vector> directions{Vector::Unit(2, 0), Vector::Unit(2, 1),
                                         Vector{{0.3, -0.7}}};
    bool ok = true;
    double worst_sd = -INFINITY, worst_scale = 0.0;
    for (const Family& f : {Family{CoarsenedFamily{1}}, Family{CoarsenedFamily{10}},
                            Family{ContinuousFamily{}}}) {
      const EffectModel model(truth, config.step, f);
      const auto data = simulate_inputs(model, config, -2.0);
      const auto report = verify_concavity(model, data, directions);
      ok = ok && report.ok();
      for (const auto& p : report.probes) {
        worst_sd = std::max(worst_sd, p.second_difference);
        worst_scale = std::max(worst_scale, std::abs(p.second_difference_double / 4.0 -
                                                     p.second_difference) /
                                                std::max(1.0, std::abs(p.second_difference)));
      }
    }
    return std::pair{ok, "max second difference " + sci(worst_sd) +
                             ", max relative scale mismatch " + sci(worst_scale)};
  });
}

CheckResult check_continuous_matches_fine() {
  return timed("continuous-time fit equals coarsened-01 fit", [] {
    ExperimentConfig config;
    config.n_trajectories = 20;
    config.n_steps = 200;
    const ContinuousModel truth = config.spring_model();
    const EffectModel fine(truth, config.step, CoarsenedFamily{1});
    const EffectModel cont(truth, config.step, ContinuousFamily{});
    double worst = 0.0;
    for (double beta1 : {0.0, -4.0}) {
      const auto a = fit_effect(fine, simulate_inputs(fine, config, beta1));
      const auto b = fit_effect(cont, simulate_inputs(cont, config, beta1));
      worst = std::max(worst, (a.effect_hat - b.effect_hat).cwiseAbs().maxCoeff());
    }
    return std::pair{worst <= 1e-6, "max |B_fine - B_continuous| " + sci(worst)};
  });
}

std::vector<CheckResult> run_verification() {
  return {check_discretization(), check_coarsening(), check_filter(), check_concavity(),
          check_continuous_matches_fine()};
}

}  // namespace biaslab
