#pragma once

#include <doctest.h>

#include "biaslab/harness.hpp"
#include "biaslab/kalman.hpp"
#include "biaslab/lingauss.hpp"
#include "biaslab/rng.hpp"

namespace biaslab::testing {

inline ContinuousModel spring() { return ExperimentConfig{}.spring_model(); }

inline Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
  return m;
}

inline ContinuousModel random_stable_continuous(Rng& rng, Eigen::Index d) {
  const Matrix m = random_matrix(rng, d, d);
  const Matrix skew = random_matrix(rng, d, d);
  const Matrix l = random_matrix(rng, d, d, 0.3);
  ContinuousModel cm;
  cm.F = -(m * m.transpose() / d + 0.2 * Matrix::Identity(d, d)) + (skew - skew.transpose()) / 2;
  cm.G = random_matrix(rng, d, 1);
  cm.Q = l * l.transpose();
  cm.H = random_matrix(rng, 1, d);
  cm.R = Matrix::Constant(1, 1, 0.01 + 0.1 * rng.uniform());
  return cm;
}

inline GaussianBelief random_belief(Rng& rng, Eigen::Index d) {
  const Matrix l = random_matrix(rng, d, d);
  return {random_matrix(rng, d, 1), l * l.transpose() + 0.1 * Matrix::Identity(d, d)};
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  REQUIRE(a.rows() == b.rows());
  REQUIRE(a.cols() == b.cols());
  return a.size() == 0 ? 0.0 : (a - b).cwiseAbs().maxCoeff();
}

}  // namespace biaslab::testing
