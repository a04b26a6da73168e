#include "biaslab/lingauss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

namespace biaslab {

namespace {

void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw DimensionError(std::string(what) + ": expected " + std::to_string(rows) + "x" +
                         std::to_string(cols) + ", got " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
  }
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw DomainError(std::string(what) + ": non-finite entry");
}

void require_positive_definite(const Matrix& m, const char* what) {
  require_symmetric_psd(m, what);
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw DomainError(std::string(what) + ": not positive definite");
  }
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

void require_symmetric_psd(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) throw DimensionError(std::string(what) + ": not square");
  require_finite(m, what);
  if (m.size() == 0) return;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw DomainError(std::string(what) + ": not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m), Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-12) {
    throw DomainError(std::string(what) + ": not positive semidefinite");
  }
}

void ContinuousModel::validate() const {
  const auto d = F.rows();
  require_shape(F, d, d, "F");
  require_shape(G, d, G.cols(), "G");
  require_shape(Q, d, d, "Q");
  require_shape(H, H.rows(), d, "H");
  require_shape(R, H.rows(), H.rows(), "R");
  for (const auto& [m, name] : {std::pair{&F, "F"}, {&G, "G"}, {&H, "H"}}) require_finite(*m, name);
  require_symmetric_psd(Q, "Q");
  require_positive_definite(R, "R");
}

void DiscreteModel::validate() const {
  const auto d = A.rows();
  require_shape(A, d, d, "A");
  require_shape(B, d, B.cols(), "B");
  require_shape(C, d, d, "C");
  require_shape(H, H.rows(), d, "H");
  require_shape(R, H.rows(), H.rows(), "R");
  for (const auto& [m, name] : {std::pair{&A, "A"}, {&B, "B"}, {&H, "H"}}) require_finite(*m, name);
  require_symmetric_psd(C, "C");
  require_positive_definite(R, "R");
  if (!(step > 0.0) || !std::isfinite(step)) throw DomainError("step: must be positive");
}

Matrix matrix_exp(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("matrix_exp: matrix is not square");
  require_finite(m, "matrix_exp");
  if (m.size() == 0) return m;
  return m.exp();
}

Matrix noise_integral(const Matrix& F, const Matrix& Q, double delta) {
  const auto d = F.rows();
  require_shape(F, d, d, "noise_integral F");
  require_shape(Q, d, d, "noise_integral Q");
  if (!(delta > 0.0)) throw DomainError("noise_integral: step must be positive");

  // exp([-F Q; 0 Fᵀ] δ) = [· E12; 0 Φᵀ]  and  C = Φ E12.
  Matrix block = Matrix::Zero(2 * d, 2 * d);
  block.topLeftCorner(d, d) = -F;
  block.topRightCorner(d, d) = Q;
  block.bottomRightCorner(d, d) = F.transpose();
  const Matrix e = matrix_exp(block * delta);
  const Matrix phi = e.bottomRightCorner(d, d).transpose();
  return symmetrized(phi * e.topRightCorner(d, d));
}

DiscreteModel discretize(const ContinuousModel& cm, double delta) {
  if (!(delta > 0.0)) throw DomainError("discretize: step must be positive");
  DiscreteModel dm;
  dm.A = matrix_exp(cm.F * delta);
  dm.B = dm.A * cm.G;
  dm.C = noise_integral(cm.F, cm.Q, delta);
  dm.H = cm.H;
  dm.R = cm.R;
  dm.step = delta;
  return dm;
}

Matrix stacked_input_matrix(const Matrix& A, const Matrix& B, int m) {
  if (m < 1) throw DomainError("coarsening factor must be >= 1");
  const auto d = A.rows();
  const auto q = B.cols();
  if (B.rows() != d) throw DimensionError("stacked_input_matrix: B rows != state dim");
  Matrix out = Matrix::Zero(m * d, m * q);
  // Block (i, j) = A^{i-j} B; fill each subdiagonal with one power.
  Matrix power_b = B;
  for (int lag = 0; lag < m; ++lag) {
    for (int j = 0; j + lag < m; ++j) out.block((j + lag) * d, j * q, d, q) = power_b;
    power_b = A * power_b;
  }
  return out;
}

CoarsenedModel coarsen(const DiscreteModel& dm, int m) {
  if (m < 1) throw DomainError("coarsen: factor must be >= 1, got " + std::to_string(m));
  CoarsenedModel out;
  out.factor = m;
  out.base = dm;
  out.window = m * dm.step;
  if (m == 1) {
    out.Ac = dm.A;
    out.Bc = dm.B;
    out.Cc = dm.C;
    return out;
  }

  const auto d = dm.A.rows();
  std::vector<Matrix> powers{Matrix::Identity(d, d)};
  for (int i = 1; i <= m; ++i) powers.push_back(dm.A * powers.back());

  out.Ac = Matrix::Zero(m * d, m * d);
  for (int i = 0; i < m; ++i) out.Ac.block(i * d, (m - 1) * d, d, d) = powers[i + 1];

  out.Bc = stacked_input_matrix(dm.A, dm.B, m);

  // Diagonal blocks are the cumulative noise of i fine steps.
  out.Cc = Matrix::Zero(m * d, m * d);
  Matrix diag = dm.C;
  for (int i = 0; i < m; ++i) {
    if (i > 0) diag = symmetrized(dm.A * diag * dm.A.transpose() + dm.C);
    out.Cc.block(i * d, i * d, d, d) = diag;
    for (int j = i + 1; j < m; ++j) {
      const Matrix cross = diag * powers[j - i].transpose();
      out.Cc.block(i * d, j * d, d, d) = cross;
      out.Cc.block(j * d, i * d, d, d) = cross.transpose();
    }
  }
  return out;
}

WindowMeasurement window_measurement(const DiscreteModel& dm, int m,
                                     std::span<const int> observed) {
  if (m < 1) throw DomainError("window_measurement: factor must be >= 1");
  if (dm.H.rows() != 1 || dm.R.rows() != 1 || dm.R.cols() != 1) {
    throw DimensionError("window_measurement: requires a scalar measurement (H must be 1xd)");
  }
  WindowMeasurement out;
  out.observed.assign(observed.begin(), observed.end());
  std::sort(out.observed.begin(), out.observed.end());
  for (std::size_t i = 0; i < out.observed.size(); ++i) {
    const int pos = out.observed[i];
    if (pos < 0 || pos >= m) {
      throw DomainError("window_measurement: position " + std::to_string(pos) +
                        " outside window of size " + std::to_string(m));
    }
    if (i > 0 && out.observed[i - 1] == pos) {
      throw DomainError("window_measurement: duplicate position " + std::to_string(pos));
    }
  }

  const auto d = dm.H.cols();
  out.Hrow = RowVector::Zero(m * d);
  if (out.observed.empty()) return out;
  const double n = static_cast<double>(out.observed.size());
  for (int pos : out.observed) out.Hrow.segment(pos * d, d) = dm.H.row(0) / n;
  out.Rvar = dm.R(0, 0) / n;
  return out;
}

}  // namespace biaslab
