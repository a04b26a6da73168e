#include "biaslab/oracles.hpp"

#include <cmath>
#include <numbers>

namespace biaslab::oracle {

Matrix taylor_exp(const Matrix& m, int terms) {
  Matrix sum = Matrix::Identity(m.rows(), m.cols());
  Matrix term = sum;
  for (int k = 1; k <= terms; ++k) {
    term = term * m / static_cast<double>(k);
    sum += term;
  }
  return sum;
}

Matrix simpson_noise_integral(const Matrix& F, const Matrix& Q, double delta, int panels) {
  if (panels % 2 != 0) ++panels;
  const double h = delta / panels;
  auto integrand = [&](double u) {
    const Matrix phi = taylor_exp(F * u);
    return Matrix(phi * Q * phi.transpose());
  };
  Matrix sum = integrand(0.0) + integrand(delta);
  for (int i = 1; i < panels; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * integrand(i * h);
  return sum * (h / 3.0);
}

namespace {

// The joint covariances get ill-conditioned when measurement noise is small
// relative to the state spread, so the dense computations run in extended
// precision.
using Real = long double;
using MatrixL = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
using VectorL = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

struct MomentsL {
  VectorL mean;
  MatrixL cov;
};

MomentsL unrolled_l(const GaussianBelief& prior, std::span<const Transition> transitions,
                    std::span<const Vector> controls) {
  const auto d = prior.mean.size();
  const auto T = static_cast<Eigen::Index>(controls.size());
  auto tr = [&](Eigen::Index t) -> const Transition& {
    return transitions.size() == 1 ? transitions[0] : transitions[t];
  };

  // Sources z = (X_0, w_1, ..., w_T) with block-diagonal covariance.
  MatrixL source_cov = MatrixL::Zero((T + 1) * d, (T + 1) * d);
  source_cov.topLeftCorner(d, d) = prior.cov.cast<Real>();
  for (Eigen::Index t = 0; t < T; ++t) {
    source_cov.block((t + 1) * d, (t + 1) * d, d, d) = tr(t).C.cast<Real>();
  }

  // X_t = map_t z + offset_t.
  MatrixL map = MatrixL::Zero(d, (T + 1) * d);
  map.leftCols(d).setIdentity();
  VectorL offset = prior.mean.cast<Real>();
  MatrixL full_map(T * d, (T + 1) * d);
  VectorL mean(T * d);
  for (Eigen::Index t = 0; t < T; ++t) {
    const MatrixL a = tr(t).A.cast<Real>();
    map = a * map;
    map.block(0, (t + 1) * d, d, d) += MatrixL::Identity(d, d);
    offset = a * offset + tr(t).B.cast<Real>() * controls[t].cast<Real>();
    full_map.middleRows(t * d, d) = map;
    mean.segment(t * d, d) = offset;
  }
  return {mean, full_map * source_cov * full_map.transpose()};
}

double joint_l(const MomentsL& states, Eigen::Index state_dim,
               std::span<const LinearObservation> observations) {
  const auto n = static_cast<Eigen::Index>(observations.size());
  if (n == 0) return 0.0;
  MatrixL obs_map = MatrixL::Zero(n, states.mean.size());
  VectorL y(n), noise(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (const auto& [t, h] : observations[i].terms) {
      obs_map.block(i, static_cast<Eigen::Index>(t) * state_dim, 1, state_dim) += h.cast<Real>();
    }
    y(i) = observations[i].value;
    noise(i) = observations[i].noise_var;
  }
  const VectorL mu = obs_map * states.mean;
  MatrixL cov = obs_map * states.cov * obs_map.transpose();
  cov.diagonal() += noise;
  const Eigen::LLT<MatrixL> llt(cov);
  const VectorL z = llt.matrixL().solve(y - mu);
  const MatrixL l = llt.matrixL();
  const Real log_det = 2 * l.diagonal().array().log().sum();
  const Real two_pi = 2 * std::numbers::pi_v<Real>;
  return static_cast<double>(-0.5L * (n * std::log(two_pi) + log_det + z.squaredNorm()));
}

}  // namespace

Moments unrolled_state_moments(const GaussianBelief& prior, std::span<const Transition> transitions,
                               std::span<const Vector> controls) {
  const auto m = unrolled_l(prior, transitions, controls);
  return {m.mean.cast<double>(), m.cov.cast<double>()};
}

double joint_gaussian_loglik(const Moments& states, Eigen::Index state_dim,
                             std::span<const LinearObservation> observations) {
  return joint_l({states.mean.cast<Real>(), states.cov.cast<Real>()}, state_dim, observations);
}

double joint_gaussian_loglik(const GaussianBelief& prior, std::span<const Transition> transitions,
                             std::span<const StepInput> inputs) {
  std::vector<Vector> controls;
  std::vector<LinearObservation> observations;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    controls.push_back(inputs[t].control);
    if (inputs[t].measurement) {
      observations.push_back({{{t, inputs[t].measurement_model->Hrow}},
                              inputs[t].measurement_model->Rvar,
                              *inputs[t].measurement});
    }
  }
  return joint_l(unrolled_l(prior, transitions, controls), prior.mean.size(), observations);
}

double averaged_observation_loglik(const DiscreteModel& fine, const GaussianBelief& prior, int m,
                                   std::span<const double> actions,
                                   std::span<const std::uint8_t> observed,
                                   std::span<const double> values) {
  const std::size_t n = actions.size() / m * m;
  std::vector<Vector> controls;
  for (std::size_t t = 0; t < n; ++t) controls.push_back(Vector::Constant(1, actions[t]));
  const Transition step{fine.A, fine.B, fine.C};
  const auto states = unrolled_l(prior, std::span(&step, 1), controls);

  std::vector<LinearObservation> observations;
  for (std::size_t w = 0; w < n / m; ++w) {
    LinearObservation obs;
    double sum = 0.0;
    int count = 0;
    for (int i = 0; i < m; ++i) {
      const std::size_t t = w * m + i;
      if (!observed[t]) continue;
      ++count;
      sum += values[t];
      obs.terms.emplace_back(t, fine.H.row(0));
    }
    if (count == 0) continue;
    for (auto& term : obs.terms) term.second /= count;
    obs.value = sum / count;
    // Mean of `count` independent N(0, R) errors.
    obs.noise_var = fine.R(0, 0) / count;
    observations.push_back(std::move(obs));
  }
  return joint_l(states, fine.state_dim(), observations);
}

}  // namespace biaslab::oracle
