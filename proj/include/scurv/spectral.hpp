#pragma once

#include <optional>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "scurv/chart.hpp"

namespace scurv {

/// Discrete operator A acting on nodal values, self-adjoint in the inner
/// product <u, v> = sum_i weights_i u_i v_i, i.e. weights_i A_ij = weights_j A_ji.
struct OperatorMatrix {
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd weights;
  std::string label;

  Eigen::Index size() const { return matrix.rows(); }
  /// max_ij |w_i A_ij - w_j A_ji| relative to max |w_i A_ij|.
  double symmetry_defect() const;
  /// M^{1/2} A M^{-1/2}, symmetric in the Euclidean sense.
  Eigen::SparseMatrix<double> symmetrized() const;
  /// A + diag(potential).
  OperatorMatrix plus_potential(const Eigen::VectorXd& potential, std::string new_label) const;
  OperatorMatrix negated(std::string new_label) const;
};

/// Discrete weighted Laplacian Delta_f of a closed chart, built from the
/// energy sum_p w_p <D u, g^{-1} D u> averaged over one-sided differences,
/// with w_p = e^{-f} sqrt(det g) times the cell volume. Constants lie in the
/// kernel exactly and the result is self-adjoint in the e^{-f} dVol weights.
OperatorMatrix weighted_laplacian_matrix(const ChartMetric& chart);

struct EigenResult {
  double lambda = 0;
  Eigen::VectorXd vector;  // M-normalized eigenvector in nodal values
  int iterations = 0;
  double residual = 0;     // ||A u - lambda u||_M
  double rayleigh = 0;     // Rayleigh quotient of `vector`
  double operator_norm = 0;
};

struct EigenConfig {
  double tolerance = 1e-8;  // relative to max(1, |lambda|)
  int max_iterations = 2000;
  double cg_tolerance = 1e-13;
  unsigned seed = 1;
};

/// Smallest eigenvalue by shifted inverse iteration with conjugate-gradient
/// solves. Throws NumericError with the last residual on non-convergence.
EigenResult min_eigenvalue(const OperatorMatrix& op, const EigenConfig& config = {});

/// All eigenvalues (ascending) by a dense symmetric eigensolver.
Eigen::VectorXd dense_spectrum(const OperatorMatrix& op);
double dense_min_eigenvalue(const OperatorMatrix& op);

/// -L_g = -Delta_g + (n - 2)/(4(n - 1)) Sc_g. The potential may be replaced
/// by a synthetic scalar field.
OperatorMatrix conformal_laplacian(const ChartMetric& chart, const std::optional<Eigen::VectorXd>& scalar = {});

double conformal_coupling(int n);

struct ConformalSpectrum {
  EigenResult eig;
  bool positive = false;
  bool inconclusive = false;  // |lambda_1| below 1e-8 * operator norm
};

ConformalSpectrum conformal_laplacian_min_eig(const ChartMetric& chart,
                                             const std::optional<Eigen::VectorXd>& scalar = {},
                                             const EigenConfig& config = {});

/// Numerical replay of the conformal-to-PSC argument: with the density of
/// `chart` and a prescribed positive Sc_{alpha,beta} field, the scalar
/// curvature Sc = Sc_{alpha,beta} - alpha Delta f + beta |grad f|^2 is used as
/// the potential of -L_g.
struct PscReplay {
  double alpha = 0, beta = 0;
  double beta_threshold = 0;  // (n - 2) alpha^2 / (4(n - 1))
  double min_sc_ab = 0;
  double min_sc = 0;
  ConformalSpectrum spectrum;
  /// min over the grid of the pointwise lower bound k (Sc_ab + (beta - |alpha| c^2) |grad f|^2)
  /// with c^2 = |alpha| (n - 2)/(4(n - 1)) chosen so the gradient term drops out.
  double pointwise_bound = 0;
};

PscReplay conformal_psc_replay(const ChartMetric& chart, double alpha, double beta, const Eigen::VectorXd& sc_ab,
                               const EigenConfig& config = {});

}  // namespace scurv
