#include "biaslab/policy_sim.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "biaslab/rng.hpp"

namespace biaslab {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Matrix psd_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
  const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

Vector standard_normal(Rng& rng, Eigen::Index n) {
  Vector z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal();
  return z;
}

}  // namespace

void PolicyParams::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("policy alpha must lie in [0, 1]");
  if (!(p_missing >= 0.0 && p_missing <= 1.0)) {
    throw DomainError("policy p_missing must lie in [0, 1]");
  }
  if (!std::isfinite(beta0) || !std::isfinite(beta1)) {
    throw DomainError("policy beta0/beta1 must be finite");
  }
}

double weighted_history(std::span<const HistoryEntry> history, double alpha) {
  if (alpha == 0.0) return 0.0;
  std::ptrdiff_t last = -1;
  for (std::size_t i = 0; i < history.size(); ++i)
    if (history[i].observed) last = static_cast<std::ptrdiff_t>(i);
  if (last < 0) return 0.0;
  // Weights α^{k-i} normalized; measuring the lag from the latest observation
  // instead of k leaves the normalized weights unchanged.
  double num = 0.0, den = 0.0;
  for (std::ptrdiff_t i = 0; i <= last; ++i) {
    if (!history[i].observed) continue;
    const double w = std::pow(alpha, static_cast<double>(last - i));
    num += w * history[i].y;
    den += w;
  }
  return num / den;
}

double policy_prob(std::span<const HistoryEntry> history, const PolicyParams& params) {
  return sigmoid(params.beta0 + params.beta1 * weighted_history(history, params.alpha));
}

void RecencyAverage::push(double y, bool observed) {
  ++steps_since_observed_;
  if (!observed) return;
  const double decay =
      weight_total_ > 0.0 ? std::pow(alpha_, static_cast<double>(steps_since_observed_)) : 0.0;
  weighted_sum_ = decay * weighted_sum_ + y;
  weight_total_ = decay * weight_total_ + 1.0;
  steps_since_observed_ = 0;
}

double RecencyAverage::value() const {
  if (alpha_ == 0.0 || weight_total_ == 0.0) return 0.0;
  return weighted_sum_ / weight_total_;
}

Trajectory simulate_trajectory(const DiscreteModel& fine, const PolicyParams& params,
                               std::size_t n_steps, const GaussianBelief& prior,
                               std::uint64_t seed) {
  params.validate();
  const auto d = fine.state_dim();
  if (fine.H.rows() != 1 || fine.H.cols() != d || fine.R.size() != 1) {
    throw DimensionError("simulate_trajectory: requires a scalar measurement (H is 1xd)");
  }
  if (fine.B.rows() != d || fine.B.cols() != 1) {
    throw DimensionError("simulate_trajectory: requires a single binary action (B is dx1)");
  }
  if (prior.mean.size() != d || prior.cov.rows() != d || prior.cov.cols() != d) {
    throw DimensionError("simulate_trajectory: prior dimension mismatch");
  }

  const Matrix noise_root = psd_sqrt(fine.C);
  const double meas_sd = std::sqrt(std::max(fine.R(0, 0), 0.0));
  const double p_observe = 1.0 - params.p_missing;

  Rng rng(seed);
  Trajectory t;
  t.step = fine.step;
  t.states.reserve(n_steps);
  t.measurements.reserve(n_steps);
  t.observed.reserve(n_steps);
  t.actions.reserve(n_steps);

  RecencyAverage history(params.alpha);
  auto draw_action = [&] {
    return rng.bernoulli(sigmoid(params.beta0 + params.beta1 * history.value())) ? 1 : 0;
  };

  Vector x = prior.mean + psd_sqrt(prior.cov) * standard_normal(rng, d);
  int u = draw_action();
  for (std::size_t k = 0; k < n_steps; ++k) {
    x = fine.A * x + fine.B.col(0) * u + noise_root * standard_normal(rng, d);
    const double y = fine.H.row(0).dot(x) + meas_sd * rng.normal();
    const bool o = rng.bernoulli(p_observe);
    t.states.push_back(x);
    t.measurements.push_back(y);
    t.observed.push_back(o ? 1 : 0);
    t.actions.push_back(static_cast<std::uint8_t>(u));
    history.push(y, o);
    if (k + 1 < n_steps) u = draw_action();
  }
  return t;
}

CoarseDataset coarsen_dataset(const Trajectory& t, int m) {
  if (m < 1) throw DomainError("coarsen_dataset: factor must be >= 1, got " + std::to_string(m));
  CoarseDataset out;
  out.factor = m;
  out.step = t.step;
  const std::size_t n_windows = t.size() / static_cast<std::size_t>(m);
  out.windows.reserve(n_windows);
  for (std::size_t w = 0; w < n_windows; ++w) {
    CoarseWindow win;
    win.actions = Vector::Zero(m);
    double sum = 0.0;
    for (int i = 0; i < m; ++i) {
      const std::size_t k = w * m + i;
      win.actions(i) = t.actions[k];
      if (t.observed[k]) {
        win.observed.push_back(i);
        sum += t.measurements[k];
      }
    }
    if (!win.observed.empty()) win.measurement = sum / static_cast<double>(win.observed.size());
    out.windows.push_back(std::move(win));
  }
  return out;
}

std::vector<StepInput> coarse_step_inputs(const CoarseDataset& data, const DiscreteModel& fine) {
  std::vector<StepInput> out;
  out.reserve(data.windows.size());
  for (const auto& win : data.windows) {
    StepInput in;
    in.control = win.actions;
    in.gap = data.factor * data.step;
    if (win.measurement) {
      const auto wm = window_measurement(fine, data.factor, win.observed);
      in.measurement = win.measurement;
      in.measurement_model = MeasurementModel{wm.Hrow, wm.Rvar};
    }
    out.push_back(std::move(in));
  }
  return out;
}

std::vector<StepInput> continuous_timeline(const Trajectory& t, const ContinuousModel& cm) {
  if (cm.H.rows() != 1 || cm.R.size() != 1) {
    throw DimensionError("continuous_timeline: requires a scalar measurement (H is 1xd)");
  }
  const MeasurementModel model{cm.H.row(0), cm.R(0, 0)};
  std::vector<StepInput> out;
  std::size_t prev = 0;  // grid index of the previous event; 0 is the prior's time
  for (std::size_t k = 1; k <= t.size(); ++k) {
    const bool measured = t.observed[k - 1] != 0;
    const bool acts = k < t.size() && t.actions[k] != 0;  // U_k, applied at time kδ
    if (!measured && !acts) continue;
    StepInput in;
    in.control = Vector::Constant(1, t.actions[prev]);
    in.gap = static_cast<double>(k - prev) * t.step;
    if (measured) {
      in.measurement = t.measurements[k - 1];
      in.measurement_model = model;
    }
    out.push_back(std::move(in));
    prev = k;
  }
  return out;
}

void write_trajectory_jsonl(const Trajectory& t, std::ostream& out) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    nlohmann::ordered_json line;
    line["k"] = i + 1;
    line["X"] = std::vector<double>(t.states[i].data(), t.states[i].data() + t.states[i].size());
    line["Y"] = t.measurements[i];
    line["O"] = static_cast<int>(t.observed[i]);
    line["U"] = static_cast<int>(t.actions[i]);
    out << line.dump() << '\n';
  }
}

Trajectory read_trajectory_jsonl(std::istream& in, double step) {
  Trajectory t;
  t.step = step;
  std::string text;
  while (std::getline(in, text)) {
    if (text.empty()) continue;
    const auto line = nlohmann::json::parse(text);
    if (line.at("k").get<std::size_t>() != t.size() + 1) {
      throw DomainError("trajectory jsonl: steps out of order at line " +
                        std::to_string(t.size() + 1));
    }
    const auto x = line.at("X").get<std::vector<double>>();
    t.states.push_back(Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size())));
    t.measurements.push_back(line.at("Y").get<double>());
    t.observed.push_back(static_cast<std::uint8_t>(line.at("O").get<int>() != 0));
    t.actions.push_back(static_cast<std::uint8_t>(line.at("U").get<int>() != 0));
  }
  return t;
}

}  // namespace biaslab
