// biaslab: simulate confounded, irregularly observed spring-model data, fit
// coarsened and continuous-time models, and write the action-effect estimates.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "biaslab/harness.hpp"
#include "biaslab/mle.hpp"
#include "biaslab/model_json.hpp"
#include "biaslab/verify.hpp"

namespace {

template <class T>
std::vector<T> parse_list(const std::string& text, const char* flag) {
  std::vector<T> out;
  std::istringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    try {
      std::size_t used = 0;
      if constexpr (std::is_same_v<T, int>) {
        out.push_back(std::stoi(item, &used));
      } else {
        out.push_back(std::stod(item, &used));
      }
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw biaslab::ConfigError(std::string(flag) + ": cannot parse '" + item + "'");
    }
  }
  return out;
}

biaslab::ExperimentConfig load(const std::string& path) {
  return path.empty() ? biaslab::ExperimentConfig{} : biaslab::load_config(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discretization-bias experiment harness"};
  app.require_subcommand(1);

  std::string config_path, out_path, factors, beta1;
  std::uint64_t seed = 0;

  auto* run = app.add_subcommand("run", "Run the beta1 sweep and write results CSV");
  run->add_option("--config", config_path, "JSON experiment config (defaults if omitted)");
  run->add_option("--out", out_path, "Output CSV path")->required();
  auto* seed_opt = run->add_option("--seed", seed, "Override master_seed");
  run->add_option("--factors", factors, "Comma-separated coarsening factors, e.g. 1,10,20,25");
  run->add_option("--beta1", beta1, "Comma-separated beta1 grid, e.g. 0,-2,-8");

  auto* verify = app.add_subcommand("verify", "Run the oracle cross-checks");

  std::size_t traj_index = 0;
  double traj_beta1 = 0.0;
  auto* simulate = app.add_subcommand("simulate", "Write one simulated trajectory as JSON lines");
  simulate->add_option("--config", config_path, "JSON experiment config");
  simulate->add_option("--out", out_path, "Output path (stdout if omitted)");
  simulate->add_option("--beta1", traj_beta1, "Policy history coefficient");
  simulate->add_option("--index", traj_index, "Trajectory index within the sweep");

  int factor = 1;
  auto* model = app.add_subcommand("model", "Print the discretized (and coarsened) model as JSON");
  model->add_option("--config", config_path, "JSON experiment config");
  model->add_option("--factor", factor, "Coarsening factor");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      auto config = load(config_path);
      if (*seed_opt) config.master_seed = seed;
      if (!factors.empty()) config.factors = parse_list<int>(factors, "--factors");
      if (!beta1.empty()) config.beta1_grid = parse_list<double>(beta1, "--beta1");
      config.validate();
      const auto rows = biaslab::run_experiment(config);
      biaslab::write_results(rows, out_path);
      std::cerr << "wrote " << rows.size() << " rows to " << out_path << "\n";
      return 0;
    }
    if (*verify) {
      bool all = true;
      for (const auto& check : biaslab::run_verification()) {
        std::printf("%s  %-60s %s (%.2fs)\n", check.passed ? "PASS" : "FAIL", check.name.c_str(),
                    check.detail.c_str(), check.seconds);
        all = all && check.passed;
      }
      return all ? 0 : 1;
    }
    if (*simulate) {
      const auto config = load(config_path);
      biaslab::PolicyParams policy = config.policy;
      policy.beta1 = traj_beta1;
      const auto fine = biaslab::discretize(config.spring_model(), config.step);
      const auto t = biaslab::simulate_trajectory(
          fine, policy, config.n_steps, biaslab::GaussianBelief::standard(2),
          biaslab::trajectory_seed(config.master_seed, traj_index));
      if (out_path.empty()) {
        biaslab::write_trajectory_jsonl(t, std::cout);
      } else {
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot open " + out_path + " for writing");
        biaslab::write_trajectory_jsonl(t, out);
      }
      return 0;
    }
    if (*model) {
      const auto config = load(config_path);
      const auto fine = biaslab::discretize(config.spring_model(), config.step);
      nlohmann::json j{{"continuous", biaslab::to_json(config.spring_model())},
                       {"discrete", biaslab::to_json(fine)}};
      if (factor > 1) j["coarsened"] = biaslab::to_json(biaslab::coarsen(fine, factor));
      std::cout << j.dump(2) << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
