#include <cmath>
#include <sstream>
#include <vector>

#include "biaslab/kalman.hpp"
#include "biaslab/oracles.hpp"
#include "biaslab/policy_sim.hpp"
#include "test_util.hpp"

using namespace biaslab;

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

DiscreteModel spring_fine() { return discretize(testing::spring(), 0.1); }

}  // namespace

TEST_CASE("policy_prob: beta1 = 0 ignores the history") {
  PolicyParams p;
  p.beta0 = -1.3;
  p.beta1 = 0.0;
  const std::vector<HistoryEntry> h{{5.0, true}, {-2.0, true}, {1.0, false}};
  CHECK(policy_prob(h, p) == doctest::Approx(sigmoid(-1.3)));
  CHECK(policy_prob({}, p) == doctest::Approx(sigmoid(-1.3)));
}

TEST_CASE("policy_prob: alpha = 1 weights observed values equally") {
  const std::vector<HistoryEntry> h{{1.0, true}, {2.0, true}, {3.0, true}};
  CHECK(weighted_history(h, 1.0) == doctest::Approx(2.0));
}

TEST_CASE("policy_prob: recency weights with missing entries") {
  const std::vector<HistoryEntry> h{{4.0, true}, {9.0, false}, {2.0, true}};
  // Direct enumeration of w_i ∝ O_i α^{k-i}, k = 3.
  const double alpha = 0.5;
  double num = 0.0, den = 0.0;
  for (int i = 1; i <= 3; ++i) {
    const double w = (h[i - 1].observed ? 1.0 : 0.0) * std::pow(alpha, 3 - i);
    num += w * h[i - 1].y;
    den += w;
  }
  REQUIRE(num / den == doctest::Approx(2.4));
  CHECK(weighted_history(h, alpha) == doctest::Approx(num / den).epsilon(1e-15));

  PolicyParams p;
  p.beta0 = 0.2;
  p.beta1 = -0.7;
  p.alpha = alpha;
  CHECK(policy_prob(h, p) == doctest::Approx(sigmoid(0.2 - 0.7 * 2.4)));
}

TEST_CASE("policy_prob: alpha = 0 switches the history off") {
  const std::vector<HistoryEntry> h{{4.0, true}, {2.0, true}};
  PolicyParams p;
  p.alpha = 0.0;
  p.beta1 = -3.0;
  CHECK(weighted_history(h, 0.0) == 0.0);
  CHECK(policy_prob(h, p) == doctest::Approx(sigmoid(p.beta0)));
}

TEST_CASE("policy_prob: nothing observed gives the baseline") {
  const std::vector<HistoryEntry> h{{4.0, false}, {2.0, false}};
  PolicyParams p;
  p.beta1 = -3.0;
  CHECK(policy_prob(h, p) == doctest::Approx(sigmoid(p.beta0)));
}

TEST_CASE("policy_prob decreases in the weighted history when beta1 < 0") {
  PolicyParams p;
  p.beta1 = -2.0;
  double previous = 1.0;
  for (double level = 0.0; level < 3.0; level += 0.25) {
    const std::vector<HistoryEntry> h{{level, true}, {level, true}};
    const double prob = policy_prob(h, p);
    CHECK(prob < previous);
    previous = prob;
  }
}

TEST_CASE("RecencyAverage agrees with the direct weighted sum") {
  Rng rng(3);
  for (double alpha : {0.0, 0.3, 0.9, 1.0}) {
    RecencyAverage streaming(alpha);
    std::vector<HistoryEntry> h;
    for (int k = 0; k < 300; ++k) {
      h.push_back({rng.normal(), rng.bernoulli(0.2)});
      streaming.push(h.back().y, h.back().observed);
      CHECK(streaming.value() == doctest::Approx(weighted_history(h, alpha)).epsilon(1e-12));
    }
  }
}

TEST_CASE("PolicyParams validation") {
  PolicyParams p;
  p.alpha = 1.5;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p = {};
  p.p_missing = -0.1;
  CHECK_THROWS_AS(p.validate(), DomainError);
}

TEST_CASE("simulate_trajectory: determinism") {
  const auto dm = spring_fine();
  PolicyParams p;
  p.beta1 = -2.0;
  const auto a = simulate_trajectory(dm, p, 500, GaussianBelief::standard(2), 42);
  const auto b = simulate_trajectory(dm, p, 500, GaussianBelief::standard(2), 42);
  const auto c = simulate_trajectory(dm, p, 500, GaussianBelief::standard(2), 43);
  std::ostringstream sa, sb, sc;
  write_trajectory_jsonl(a, sa);
  write_trajectory_jsonl(b, sb);
  write_trajectory_jsonl(c, sc);
  CHECK(sa.str() == sb.str());
  CHECK(sa.str() != sc.str());
  CHECK(a.size() == 500);
  CHECK(a.actions.size() == 500);
}

TEST_CASE("simulate_trajectory: nothing observed means baseline actions") {
  const auto dm = spring_fine();
  PolicyParams p;
  p.p_missing = 1.0;
  p.beta1 = -50.0;
  p.beta0 = 0.0;
  const auto t = simulate_trajectory(dm, p, 20000, GaussianBelief::standard(2), 5);
  std::size_t observed = 0, acted = 0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    observed += t.observed[k];
    acted += t.actions[k];
  }
  CHECK(observed == 0);
  // π = sigmoid(0) = 1/2 at every step.
  CHECK(std::abs(acted / 20000.0 - 0.5) <= 3 * std::sqrt(0.25 / 20000));
}

TEST_CASE("simulate_trajectory: action and observation rates") {
  const auto dm = spring_fine();
  PolicyParams p;  // beta1 = 0, p_missing = 0.8
  const std::size_t n = 100000;
  const auto t = simulate_trajectory(dm, p, n, GaussianBelief::standard(2), 6);
  double acted = 0, observed = 0;
  for (std::size_t k = 0; k < n; ++k) {
    acted += t.actions[k];
    observed += t.observed[k];
  }
  const double pi = sigmoid(p.beta0);
  CHECK(std::abs(acted / n - pi) <= 3 * std::sqrt(pi * (1 - pi) / n));
  CHECK(std::abs(observed / n - 0.2) <= 3 * std::sqrt(0.2 * 0.8 / n));
}

TEST_CASE("simulate_trajectory: noiseless recursion") {
  DiscreteModel dm = spring_fine();
  dm.C.setZero();
  dm.R.setZero();
  PolicyParams p;
  p.beta0 = -1000.0;  // never act
  const GaussianBelief x0{Vector{{1.0, -0.5}}, Matrix::Zero(2, 2)};
  const auto t = simulate_trajectory(dm, p, 50, x0, 1);
  Vector x = x0.mean;
  for (std::size_t k = 0; k < 50; ++k) {
    x = dm.A * x;
    CHECK(t.actions[k] == 0);
    CHECK(t.measurements[k] == doctest::Approx(x(0)).epsilon(1e-12));
  }
}

TEST_CASE("coarsen_dataset") {
  const auto dm = spring_fine();
  PolicyParams p;
  p.beta1 = -1.0;
  const auto t = simulate_trajectory(dm, p, 103, GaussianBelief::standard(2), 9);

  SUBCASE("factor 1 mirrors the trajectory") {
    const auto ds = coarsen_dataset(t, 1);
    REQUIRE(ds.windows.size() == t.size());
    for (std::size_t k = 0; k < t.size(); ++k) {
      CHECK(ds.windows[k].actions(0) == t.actions[k]);
      CHECK(ds.windows[k].measurement.has_value() == (t.observed[k] != 0));
      if (t.observed[k]) CHECK(*ds.windows[k].measurement == t.measurements[k]);
    }
  }
  SUBCASE("partial trailing window is dropped") {
    const auto ds = coarsen_dataset(t, 10);
    CHECK(ds.windows.size() == 10);
    for (std::size_t w = 0; w < ds.windows.size(); ++w) {
      for (int i = 0; i < 10; ++i) CHECK(ds.windows[w].actions(i) == t.actions[w * 10 + i]);
    }
  }
  SUBCASE("averaging") {
    Trajectory tiny;
    tiny.step = 0.1;
    tiny.states.assign(4, Vector::Zero(2));
    tiny.measurements = {2.0, 7.0, 4.0, 1.0};
    tiny.observed = {1, 0, 1, 0};
    tiny.actions = {0, 1, 1, 0};
    const auto ds = coarsen_dataset(tiny, 4);
    REQUIRE(ds.windows.size() == 1);
    CHECK(*ds.windows[0].measurement == 3.0);
    CHECK(ds.windows[0].observed == std::vector<int>{0, 2});
    const auto empty = coarsen_dataset(Trajectory{{Vector::Zero(2)}, {1.0}, {0}, {1}, 0.1}, 1);
    CHECK_FALSE(empty.windows[0].measurement.has_value());
  }
  SUBCASE("invalid factor") { CHECK_THROWS_AS(coarsen_dataset(t, 0), DomainError); }
}

TEST_CASE("coarse pipeline likelihood equals the averaged-observation joint Gaussian") {
  const auto dm = discretize(testing::spring(), 0.1);
  PolicyParams p;
  p.beta1 = -2.0;
  p.p_missing = 0.5;
  for (int m : {1, 3, 5}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto t = simulate_trajectory(dm, p, 2 * m, GaussianBelief::standard(2), seed);
      const auto coarse = coarsen(dm, m);
      const auto inputs = coarse_step_inputs(coarsen_dataset(t, m), dm);
      GaussianBelief stacked{Vector::Zero(2 * m), Matrix::Zero(2 * m, 2 * m)};
      stacked.cov.bottomRightCorner(2, 2).setIdentity();
      const Transition tr{coarse.Ac, coarse.Bc, coarse.Cc};
      const double got = filter_loglik(stacked, std::span(&tr, 1), inputs).loglik;

      std::vector<double> actions(t.actions.begin(), t.actions.end());
      const double want = oracle::averaged_observation_loglik(
          dm, GaussianBelief::standard(2), m, actions, t.observed, t.measurements);
      CHECK(std::abs(got - want) <= 1e-8);
    }
  }
}

TEST_CASE("coarsening by 1 then filtering equals filtering the fine trajectory") {
  const auto dm = discretize(testing::spring(), 0.1);
  PolicyParams p;
  p.beta1 = -3.0;
  const auto t = simulate_trajectory(dm, p, 400, GaussianBelief::standard(2), 12);
  const Transition tr{dm.A, dm.B, dm.C};

  std::vector<StepInput> direct;
  for (std::size_t k = 0; k < t.size(); ++k) {
    StepInput in{Vector::Constant(1, t.actions[k]), std::nullopt, std::nullopt, 0.1};
    if (t.observed[k]) {
      in.measurement = t.measurements[k];
      in.measurement_model = MeasurementModel{dm.H.row(0), dm.R(0, 0)};
    }
    direct.push_back(in);
  }
  const auto via_coarse = coarse_step_inputs(coarsen_dataset(t, 1), dm);
  const auto prior = GaussianBelief::standard(2);
  CHECK(filter_loglik(prior, std::span(&tr, 1), via_coarse).loglik ==
        filter_loglik(prior, std::span(&tr, 1), direct).loglik);
}

TEST_CASE("continuous timeline") {
  Trajectory t;
  t.step = 0.5;
  t.states.assign(6, Vector::Zero(2));
  t.measurements = {1, 2, 3, 4, 5, 6};
  t.observed = {0, 1, 0, 0, 0, 1};
  t.actions = {1, 0, 0, 1, 0, 1};  // U_0..U_5
  const auto tl = continuous_timeline(t, testing::spring());
  // Events: k=2 (measured), k=3 (U_3 = 1), k=5 (U_5 = 1), k=6 (measured).
  REQUIRE(tl.size() == 4);
  CHECK(tl[0].gap == 1.0);
  CHECK(tl[0].control(0) == 1.0);  // U_0 at time 0
  CHECK(*tl[0].measurement == 2.0);
  CHECK(tl[1].gap == 0.5);
  CHECK(tl[1].control(0) == 0.0);  // U_2
  CHECK_FALSE(tl[1].measurement.has_value());
  CHECK(tl[2].gap == 1.0);
  CHECK(tl[2].control(0) == 1.0);  // U_3
  CHECK_FALSE(tl[2].measurement.has_value());
  CHECK(tl[3].gap == 0.5);
  CHECK(tl[3].control(0) == 1.0);  // U_5
  CHECK(*tl[3].measurement == 6.0);
}

TEST_CASE("trajectory JSON lines round trip") {
  const auto dm = spring_fine();
  const auto t = simulate_trajectory(dm, PolicyParams{}, 50, GaussianBelief::standard(2), 8);
  std::stringstream ss;
  write_trajectory_jsonl(t, ss);
  const std::string text = ss.str();
  CHECK(text.rfind("{\"k\":1,\"X\":[", 0) == 0);
  const auto back = read_trajectory_jsonl(ss, 0.1);
  REQUIRE(back.size() == t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    CHECK(back.states[k] == t.states[k]);
    CHECK(back.measurements[k] == t.measurements[k]);
  }
  CHECK(back.observed == t.observed);
  CHECK(back.actions == t.actions);
}
