#pragma once

#include <string>
#include <vector>

namespace biaslab {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

/// exp(F·0.1) against a 30-term Taylor series and the noise integral against
/// 10⁴-panel Simpson quadrature, both to 1e-10.
CheckResult check_discretization();

/// One coarse prediction against brute-force unrolling of the fine model,
/// m ∈ {2, 3, 5, 10}, to 1e-9 entrywise.
CheckResult check_coarsening();

/// Recursive filter log-likelihoods against dense joint-Gaussian densities on
/// short fully and partially observed sequences, to 1e-9.
CheckResult check_filter();

/// Second differences of the effect log-likelihood are non-positive and
/// scale by exactly 4 when the probe doubles.
CheckResult check_concavity();

/// Continuous-time and coarsened-01 fits agree to 1e-6 on a small simulated set.
CheckResult check_continuous_matches_fine();

std::vector<CheckResult> run_verification();

}  // namespace biaslab
