#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "biaslab/errors.hpp"

namespace biaslab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Linear SDE  dX = F X dt + G U(t) + L dβ,  Y = H X + N(0, R),  Q = L Lᵀ.
struct ContinuousModel {
  Matrix F;  // d×d
  Matrix G;  // d×q
  Matrix Q;  // d×d, spectral density of the driving noise
  Matrix H;  // p×d
  Matrix R;  // p×p

  Eigen::Index state_dim() const { return F.rows(); }
  Eigen::Index input_dim() const { return G.cols(); }
  Eigen::Index obs_dim() const { return H.rows(); }

  /// Throws DimensionError / DomainError if shapes or definiteness are off.
  void validate() const;
};

/// Gaussian HMM on a uniform grid of width `step`:
///   X_k | X_{k-1}, U_{k-1} ~ N(A X_{k-1} + B U_{k-1}, C),  Y_k | X_k ~ N(H X_k, R).
struct DiscreteModel {
  Matrix A;
  Matrix B;
  Matrix C;
  Matrix H;
  Matrix R;
  double step = 0.0;

  Eigen::Index state_dim() const { return A.rows(); }
  Eigen::Index input_dim() const { return B.cols(); }

  void validate() const;
};

/// A discrete model with m consecutive states stacked into one. Block i of the
/// stacked state is X_{m(k-1)+i}; block j of the stacked control is
/// U_{m(k-1)+j-1}, i.e. the action applied on the transition into block j.
struct CoarsenedModel {
  int factor = 1;
  DiscreteModel base;
  Matrix Ac;  // (md)×(md); only the last block column is nonzero
  Matrix Bc;  // (md)×(mq); block lower triangular
  Matrix Cc;  // (md)×(md)
  double window = 0.0;

  Eigen::Index stacked_dim() const { return Ac.rows(); }
};

/// Effective scalar measurement for one coarse window when the observed fine
/// measurements in it are averaged. `observed` holds 0-based in-window
/// positions; empty means the window carries no measurement.
struct WindowMeasurement {
  RowVector Hrow;
  double Rvar = 0.0;
  std::vector<int> observed;

  bool has_measurement() const { return !observed.empty(); }
};

/// Throws unless `m` is finite, symmetric to 1e-12 and has no eigenvalue
/// below -1e-12. `what` names the matrix in the message.
void require_symmetric_psd(const Matrix& m, const char* what);

/// exp(M) for square M.
Matrix matrix_exp(const Matrix& m);

/// ∫₀^δ e^{Fu} Q e^{Fᵀu} du by the Van Loan block exponential, symmetrized.
Matrix noise_integral(const Matrix& F, const Matrix& Q, double delta);

/// Exact step-δ discretization under the impulse-input convention:
/// A = e^{Fδ}, B = A G, C = noise_integral(F, Q, δ); H and R unchanged.
DiscreteModel discretize(const ContinuousModel& cm, double delta);

/// Stacked-state model for coarsening factor m.
CoarsenedModel coarsen(const DiscreteModel& dm, int m);

/// Stacked input matrix with blocks A^{i-j} B for i ≥ j. Linear in B.
Matrix stacked_input_matrix(const Matrix& A, const Matrix& B, int m);

/// Measurement model of the mean of the observed fine measurements in a
/// window of m positions. Requires a scalar measurement (H is 1×d).
WindowMeasurement window_measurement(const DiscreteModel& dm, int m,
                                     std::span<const int> observed);

}  // namespace biaslab
