#include "biaslab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "biaslab/mle.hpp"
#include "biaslab/rng.hpp"

namespace biaslab {

using nlohmann::json;

namespace {

void require(bool ok, const std::string& field, const std::string& message) {
  if (!ok) throw ConfigError("config field '" + field + "': " + message);
}

// Copies j[key] into out if present, reporting type errors against the field path.
template <class T>
void read_field(const json& j, const char* key, const std::string& path, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config field '" + path + key + "': " + e.what());
  }
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& path) {
  if (!j.is_object()) throw ConfigError("config field '" + path + "': expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError("config field '" + path + key + "': unknown key");
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

void ExperimentConfig::validate() const {
  require(std::isfinite(nu) && nu > 0.0, "spring.nu", "must be positive");
  require(std::isfinite(gamma) && gamma >= 0.0, "spring.gamma", "must be non-negative");
  require(std::isfinite(q11) && q11 >= 0.0, "noise.q11", "must be non-negative");
  require(std::isfinite(q22) && q22 >= 0.0, "noise.q22", "must be non-negative");
  require(std::isfinite(r) && r > 0.0, "noise.r", "must be positive");
  require(std::isfinite(step) && step > 0.0, "step", "must be positive");
  require(n_steps > 0, "n_steps", "must be positive");
  require(n_trajectories > 0, "n_trajectories", "must be positive");
  require(!factors.empty(), "factors", "must not be empty");
  require(std::ranges::find(factors, 1) != factors.end(), "factors", "must include 1");
  for (int m : factors) {
    require(m >= 1, "factors", "entries must be >= 1");
    require(n_steps % static_cast<std::size_t>(m) == 0, "factors",
            "n_steps (" + std::to_string(n_steps) + ") is not divisible by " + std::to_string(m));
  }
  require(std::ranges::find(beta1_grid, 0.0) != beta1_grid.end(), "beta1_grid",
          "must include 0");
  for (double b : beta1_grid) require(std::isfinite(b), "beta1_grid", "entries must be finite");
  require(std::isfinite(policy.beta0), "policy.beta0", "must be finite");
  require(policy.alpha >= 0.0 && policy.alpha <= 1.0, "policy.alpha", "must lie in [0, 1]");
  require(policy.p_missing >= 0.0 && policy.p_missing <= 1.0, "policy.p_missing",
          "must lie in [0, 1]");
}

ContinuousModel ExperimentConfig::spring_model() const {
  ContinuousModel cm;
  cm.F = Matrix{{0.0, 1.0}, {-nu * nu, -gamma}};
  cm.G = Matrix{{0.0}, {0.5}};
  cm.Q = Matrix{{q11, 0.0}, {0.0, q22}};
  cm.H = Matrix{{1.0, 0.0}};
  cm.R = Matrix{{r}};
  return cm;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  reject_unknown(j,
                 {"spring", "noise", "step", "n_steps", "n_trajectories", "factors", "beta1_grid",
                  "policy", "master_seed"},
                 "");
  if (j.contains("spring")) {
    const auto& s = j.at("spring");
    reject_unknown(s, {"nu", "gamma"}, "spring.");
    read_field(s, "nu", "spring.", c.nu);
    read_field(s, "gamma", "spring.", c.gamma);
  }
  if (j.contains("noise")) {
    const auto& n = j.at("noise");
    reject_unknown(n, {"q11", "q22", "r"}, "noise.");
    read_field(n, "q11", "noise.", c.q11);
    read_field(n, "q22", "noise.", c.q22);
    read_field(n, "r", "noise.", c.r);
  }
  read_field(j, "step", "", c.step);
  read_field(j, "n_steps", "", c.n_steps);
  read_field(j, "n_trajectories", "", c.n_trajectories);
  read_field(j, "factors", "", c.factors);
  read_field(j, "beta1_grid", "", c.beta1_grid);
  if (j.contains("policy")) {
    const auto& p = j.at("policy");
    reject_unknown(p, {"beta0", "alpha", "p_missing"}, "policy.");
    read_field(p, "beta0", "policy.", c.policy.beta0);
    read_field(p, "alpha", "policy.", c.policy.alpha);
    read_field(p, "p_missing", "policy.", c.policy.p_missing);
  }
  read_field(j, "master_seed", "", c.master_seed);
  c.validate();
  return c;
}

json to_json(const ExperimentConfig& c) {
  return {{"spring", {{"nu", c.nu}, {"gamma", c.gamma}}},
          {"noise", {{"q11", c.q11}, {"q22", c.q22}, {"r", c.r}}},
          {"step", c.step},
          {"n_steps", c.n_steps},
          {"n_trajectories", c.n_trajectories},
          {"factors", c.factors},
          {"beta1_grid", c.beta1_grid},
          {"policy",
           {{"beta0", c.policy.beta0}, {"alpha", c.policy.alpha}, {"p_missing", c.policy.p_missing}}},
          {"master_seed", c.master_seed}};
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

std::uint64_t trajectory_seed(std::uint64_t master_seed, std::size_t index) {
  return mix_seed(master_seed, index);
}

Vector true_effect(const ExperimentConfig& config) {
  return discretize(config.spring_model(), config.step).B.col(0);
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& config) {
  config.validate();
  const ContinuousModel truth = config.spring_model();
  const GaussianBelief x0 = GaussianBelief::standard(truth.state_dim());

  std::vector<Family> families;
  for (int m : config.factors) families.emplace_back(CoarsenedFamily{m});
  families.emplace_back(ContinuousFamily{});
  std::vector<EffectModel> models;
  for (const auto& f : families) models.emplace_back(truth, config.step, f, x0);
  const DiscreteModel& fine = models.front().fine();

  std::vector<ResultRow> rows;
  for (double beta1 : config.beta1_grid) {
    PolicyParams policy = config.policy;
    policy.beta1 = beta1;
    std::vector<Trajectory> trajectories;
    trajectories.reserve(config.n_trajectories);
    for (std::size_t i = 0; i < config.n_trajectories; ++i) {
      trajectories.push_back(simulate_trajectory(fine, policy, config.n_steps, x0,
                                                 trajectory_seed(config.master_seed, i)));
    }
    for (const auto& model : models) {
      std::vector<std::vector<StepInput>> datasets;
      datasets.reserve(trajectories.size());
      for (const auto& t : trajectories) datasets.push_back(model.inputs(t));
      const FitResult fit = fit_effect(model, datasets);
      for (Eigen::Index j = 0; j < fit.effect_hat.size(); ++j) {
        rows.push_back({beta1, family_label(model.family()), "B" + std::to_string(j + 1),
                        fit.effect_hat(j), fit.effect_stderr(j), config.master_seed});
      }
    }
  }
  return rows;
}

std::string format_results_csv(std::vector<ResultRow> rows) {
  std::ranges::stable_sort(rows, [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.beta1, a.model, a.param) < std::tie(b.beta1, b.model, b.param);
  });
  std::string out = "beta1,model,param,estimate,stderr,seed\n";
  for (const auto& r : rows) {
    out += format_double(r.beta1) + ',' + r.model + ',' + r.param + ',' +
           format_double(r.estimate) + ',' + format_double(r.std_error) + ',' +
           std::to_string(r.seed) + '\n';
  }
  return out;
}

std::vector<ResultRow> parse_results_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "beta1,model,param,estimate,stderr,seed") {
    throw std::runtime_error("results csv: unexpected header");
  }
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream ls(line);
    for (std::string f; std::getline(ls, f, ',');) fields.push_back(f);
    if (fields.size() != 6) throw std::runtime_error("results csv: malformed row '" + line + "'");
    rows.push_back({std::stod(fields[0]), fields[1], fields[2], std::stod(fields[3]),
                    std::stod(fields[4]), std::stoull(fields[5])});
  }
  return rows;
}

void write_results(const std::vector<ResultRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << format_results_csv(rows);
  if (!out.flush()) throw std::runtime_error("write failed for " + path.string());
}

std::vector<ResultRow> read_results(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_results_csv(buf.str());
}

}  // namespace biaslab
