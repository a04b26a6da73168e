// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--expect-fail N]...
//
// Criteria listed with --expect-fail still print FAIL when they fail but do
// not affect the exit status.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "biaslab/harness.hpp"
#include "biaslab/verify.hpp"

using namespace biaslab;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome from_check(const CheckResult& r, double limit_seconds) {
  Outcome o{r.passed, r.detail};
  char buf[64];
  std::snprintf(buf, sizeof buf, " [%.3fs]", r.seconds);
  o.detail += buf;
  if (limit_seconds > 0 && r.seconds >= limit_seconds) {
    o.passed = false;
    o.detail += " exceeds " + std::to_string(limit_seconds) + "s";
  }
  return o;
}

const ResultRow* find_row(const std::vector<ResultRow>& rows, double beta1, const std::string& model,
                          const std::string& param) {
  for (const auto& r : rows) {
    if (r.beta1 == beta1 && r.model == model && r.param == param) return &r;
  }
  return nullptr;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> expected_failures;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--expect-fail") == 0 && i + 1 < argc) {
      expected_failures.insert(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: acceptance [--expect-fail N]...\n");
      return 2;
    }
  }

  const ExperimentConfig config;
  const Vector truth = true_effect(config);
  std::vector<ResultRow> rows;
  double full_seconds = 0.0;
  auto full_run = [&]() -> const std::vector<ResultRow>& {
    if (rows.empty()) {
      const auto t0 = std::chrono::steady_clock::now();
      rows = run_experiment(config);
      full_seconds = seconds_since(t0);
    }
    return rows;
  };

  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"discretization", [] { return from_check(check_discretization(), 1.0); }},
      {"coarsening", [] { return from_check(check_coarsening(), 5.0); }},
      {"filter", [] { return from_check(check_filter(), 0.0); }},
      {"concavity", [] { return from_check(check_concavity(), 0.0); }},
      {"no-confounding consistency",
       [&] {
         const auto& r = full_run();
         Outcome o{true, ""};
         double worst = 0.0;
         std::string worst_at;
         for (const auto& row : r) {
           if (row.beta1 != 0.0) continue;
           const double b = truth(row.param == "B1" ? 0 : 1);
           const double z = std::abs(row.estimate - b) / row.std_error;
           if (!(z <= 3.0)) o.passed = false;
           if (!(z <= worst)) {
             worst = z;
             worst_at = row.model + " " + row.param;
           }
         }
         o.detail = "max |est-true|/se = " + fmt("%.2f", worst) + " (" + worst_at + ")" +
                    fmt(", full run %.1fs", full_seconds);
         if (full_seconds >= 300.0) {
           o.passed = false;
           o.detail += " exceeds 300s";
         }
         return o;
       }},
      {"continuous equals coarsened-01",
       [&] {
         const auto& r = full_run();
         Outcome o{true, ""};
         double worst = 0.0;
         std::size_t compared = 0;
         for (const auto& row : r) {
           if (row.model != "continuous") continue;
           const ResultRow* fine = find_row(r, row.beta1, "coarsened-01", row.param);
           if (!fine) {
             o.passed = false;
             continue;
           }
           ++compared;
           const double diff = std::abs(fine->estimate - row.estimate);
           worst = std::max(worst, diff);
           if (!(diff <= 1e-6)) o.passed = false;
         }
         if (compared != 2 * config.beta1_grid.size()) o.passed = false;
         o.detail = "max |diff| = " + fmt("%.3g", worst) + " over " + std::to_string(compared) +
                    " estimates";
         return o;
       }},
      {"sign flip at most negative beta1",
       [&] {
         const auto& r = full_run();
         double beta1 = std::numeric_limits<double>::infinity();
         for (double b : config.beta1_grid) beta1 = std::min(beta1, b);
         const ResultRow* m20 = find_row(r, beta1, "coarsened-20", "B1");
         const ResultRow* m25 = find_row(r, beta1, "coarsened-25", "B1");
         Outcome o;
         if (!m20 || !m25) {
           o.detail = "missing coarsened-20/25 rows";
           return o;
         }
         o.passed = truth(0) > 0.0 && m20->estimate < 0.0 && m25->estimate < 0.0;
         o.detail = fmt("beta1 = %g: true B1 = %.4f, ", beta1, truth(0)) +
                    fmt("coarsened-20 B1 = %.4f, coarsened-25 B1 = %.4f", m20->estimate,
                        m25->estimate);
         return o;
       }},
      {"determinism",
       [&] {
         const std::string a = format_results_csv(full_run());
         const std::string b = format_results_csv(run_experiment(config));
         return Outcome{a == b, std::to_string(a.size()) + " bytes compared"};
       }},
  };

  int unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const bool expected = expected_failures.contains(id);
    std::printf("[%s] %d %s: %s%s\n", o.passed ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                o.detail.c_str(), !o.passed && expected ? " (expected failure)" : "");
    std::fflush(stdout);
    if (!o.passed && !expected) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
