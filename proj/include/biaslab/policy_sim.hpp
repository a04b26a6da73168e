#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "biaslab/kalman.hpp"
#include "biaslab/lingauss.hpp"

namespace biaslab {

/// Logistic action policy driven by a recency-weighted mean of the observed
/// measurements:  logit π_k = beta0 + beta1 Σ_i w_i Y_i,  w_i ∝ O_i alpha^{k-i}.
struct PolicyParams {
  double beta0 = -2.0;
  double beta1 = 0.0;
  double alpha = 0.9;
  double p_missing = 0.8;

  void validate() const;
};

struct HistoryEntry {
  double y = 0.0;
  bool observed = false;
};

/// Σ w_i Y_i with weights normalized over the observed entries. Zero when
/// nothing is observed or alpha == 0 (the history is switched off).
double weighted_history(std::span<const HistoryEntry> history, double alpha);

double policy_prob(std::span<const HistoryEntry> history, const PolicyParams& params);

/// Streaming form of weighted_history: push one entry per step.
class RecencyAverage {
 public:
  explicit RecencyAverage(double alpha) : alpha_(alpha) {}

  void push(double y, bool observed);
  double value() const;

 private:
  double alpha_;
  // Sums rescaled so the most recent observation has weight 1.
  double weighted_sum_ = 0.0;
  double weight_total_ = 0.0;
  long steps_since_observed_ = 0;
};

/// One simulated episode on the fine grid, n steps long. Index t holds
/// X_{t+1}, Y_{t+1}, O_{t+1} and the action U_t applied on the transition
/// into X_{t+1}; U_t was drawn after seeing Y_1..Y_t.
struct Trajectory {
  std::vector<Vector> states;
  std::vector<double> measurements;
  std::vector<std::uint8_t> observed;
  std::vector<std::uint8_t> actions;
  double step = 0.0;

  std::size_t size() const { return states.size(); }
};

/// Requires a scalar measurement model (H is 1×d). Deterministic in `seed`.
Trajectory simulate_trajectory(const DiscreteModel& fine, const PolicyParams& params,
                               std::size_t n_steps, const GaussianBelief& prior,
                               std::uint64_t seed);

struct CoarseWindow {
  std::optional<double> measurement;  // mean of the observed fine values
  std::vector<int> observed;          // 0-based in-window positions
  Vector actions;                     // length m, actions into each in-window state
};

struct CoarseDataset {
  int factor = 1;
  double step = 0.0;
  std::vector<CoarseWindow> windows;
};

/// Windows of m fine steps; a trailing partial window is dropped.
CoarseDataset coarsen_dataset(const Trajectory& t, int m);

/// Filter inputs for the coarsened model of `fine`, with per-window averaged
/// measurement models.
std::vector<StepInput> coarse_step_inputs(const CoarseDataset& data, const DiscreteModel& fine);

/// Irregular event timeline for the continuous model: one step per grid time
/// carrying a measurement or a nonzero action. Each step's control is the
/// impulse at the previous event (time 0 for the first), its gap the elapsed time.
std::vector<StepInput> continuous_timeline(const Trajectory& t, const ContinuousModel& cm);

/// JSON lines, one per step: {"k", "X", "Y", "O", "U"} with k = 1..n and U the
/// action applied on the transition into X_k.
void write_trajectory_jsonl(const Trajectory& t, std::ostream& out);
Trajectory read_trajectory_jsonl(std::istream& in, double step);

}  // namespace biaslab
