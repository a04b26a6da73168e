#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "biaslab/lingauss.hpp"
#include "biaslab/policy_sim.hpp"

namespace biaslab {

struct ExperimentConfig {
  // Stochastic spring  F = [0 1; -nu² -gamma],  G = [0 0.5]ᵀ,  H = [1 0].
  double nu = 1.0;
  double gamma = 0.5;
  double q11 = 1e-8;
  double q22 = 1e-2;
  double r = 1e-4;

  double step = 0.1;
  std::size_t n_steps = 500;
  std::size_t n_trajectories = 500;
  std::vector<int> factors{1, 10, 20, 25};
  std::vector<double> beta1_grid{0.0, -0.5, -1.0, -2.0, -4.0, -8.0};
  PolicyParams policy;  // beta1 is taken from the grid
  std::uint64_t master_seed = 1;

  /// Throws ConfigError naming the offending field.
  void validate() const;

  ContinuousModel spring_model() const;
};

/// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

struct ResultRow {
  double beta1 = 0.0;
  std::string model;  // family label
  std::string param;  // "B1" or "B2"
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t seed = 0;

  bool operator==(const ResultRow&) const = default;
};

/// Seed of trajectory `index`; the same trajectory seeds are reused at every
/// beta1 so the sweep compares policies on common random numbers.
std::uint64_t trajectory_seed(std::uint64_t master_seed, std::size_t index);

/// True effect B = Φ(δ)G of the configured spring model.
Vector true_effect(const ExperimentConfig& config);

/// Full sweep: for each beta1, simulate, fit every coarsening factor and the
/// continuous model, emit one row per (beta1, model, B1/B2).
std::vector<ResultRow> run_experiment(const ExperimentConfig& config);

/// CSV text with header, rows sorted by (beta1, model, param), 10 significant digits.
std::string format_results_csv(std::vector<ResultRow> rows);
std::vector<ResultRow> parse_results_csv(const std::string& text);

void write_results(const std::vector<ResultRow>& rows, const std::filesystem::path& path);
std::vector<ResultRow> read_results(const std::filesystem::path& path);

}  // namespace biaslab
