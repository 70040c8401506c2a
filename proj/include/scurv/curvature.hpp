#pragma once

#include <vector>

#include <Eigen/Dense>

#include "scurv/chart.hpp"

namespace scurv {

using Christoffel = Eigen::Matrix<double, 27, 1>;  // Gamma^k_ij at k * 9 + i * 3 + j

inline double gamma_at(const Christoffel& c, int k, int i, int j) { return c(k * 9 + i * 3 + j); }

/// Per-node curvature quantities of a chart, from central second-order
/// finite differences (one-sided second order at open boundaries).
struct CurvatureFields {
  int n = 0;
  std::vector<Christoffel> christoffel;
  std::vector<Eigen::Matrix3d> ginv;
  std::vector<Eigen::Matrix3d> ricci;
  std::vector<Eigen::Matrix3d> hess_f;  // covariant Hessian
  std::vector<Eigen::Matrix3d> ric_f;   // Bakry-Emery Ricci + Hess f
  std::vector<Eigen::Vector3d> grad_f;  // d f (covariant components)
  Eigen::VectorXd sqrt_det;
  Eigen::VectorXd scalar;
  Eigen::VectorXd riem_norm2;
  Eigen::VectorXd ric_norm2;
  Eigen::VectorXd lap_f;  // trace of the Hessian
  Eigen::VectorXd grad_norm2;
};

CurvatureFields curvature_fields(const ChartMetric& chart);

/// Sc + alpha * Delta f - beta * |grad f|^2, node by node.
Eigen::VectorXd weighted_scalar_curvature(const CurvatureFields& fields, double alpha, double beta);
Eigen::VectorXd weighted_scalar_curvature(const ChartMetric& chart, double alpha, double beta);

struct WeightPair {
  double alpha = 0;
  double beta = 0;
};

/// (3, 3): the pair matching the volumic definition.
inline WeightPair volumic_pair() { return {3.0, 3.0}; }
/// (2(n-1)/n, (n-1)(n-2)/n^2): the conformally invariant pair.
inline WeightPair cgy_pair(int n) { return {2.0 * (n - 1) / n, (n - 1.0) * (n - 2.0) / (double(n) * n)}; }
/// (2, (m+1)/m) for m >= 1.
WeightPair case_pair(int m);
/// (2, 1): Perelman's P-scalar curvature, the m -> infinity member of the family above.
inline WeightPair perelman_pair() { return {2.0, 1.0}; }

/// Metric e^{2w} g with density f + n w, which keeps e^{-f} dVol_g fixed.
ChartMetric conformal_change(const ChartMetric& chart, const Eigen::VectorXd& w);

struct ResidualReport {
  double residual = 0;  // max |lhs - rhs| / (1 + max |rhs|)
  double max_abs = 0;   // max |lhs - rhs|
  double rhs_scale = 0;
};

/// Sc_{a0,b0}(e^{2w} g, f + n w) against e^{-2w} Sc_{a0,b0}(g, f) for the
/// conformally invariant pair, measured on nodes away from open boundaries.
ResidualReport cgy_invariance_residual(const ChartMetric& chart, const Eigen::VectorXd& w, int margin = 3);

struct ConformalDensityReport {
  ChartMetric tilde;
  /// Against e^{f/(n-1)} (Sc + 2 Delta f - (n-2)/(n-1) |grad f|^2).
  ResidualReport stated;
  /// Against e^{2f/(n-1)} (...), the prefactor produced by g~ = e^{-2f/(n-1)} g.
  ResidualReport corrected;
};

/// Builds g~ = e^{-2f/(n-1)} g and compares its scalar curvature with the
/// weighted combination of (g, f). Requires n >= 2.
ConformalDensityReport conformal_metric_from_density(const ChartMetric& chart, int margin = 3);

struct GaussBonnetReport {
  double integral = 0;      // integral of Sc_{alpha,beta} dVol
  double rhs = 0;           // 4 pi chi - beta * integral of |grad f|^2 dVol
  double grad_integral = 0;
  double laplacian_integral = 0;
  double residual = 0;      // |integral - rhs| / (1 + |rhs|)
};

GaussBonnetReport gauss_bonnet_weighted_check(const Atlas& atlas, double alpha, double beta);

/// Pointwise minimum of Sc_{alpha,beta} on a flat torus chart.
double torus_obstruction_scan(const ChartMetric& chart, double alpha, double beta);

/// Integral of a node field against dVol_g (trapezoid rule, chart weights).
double integrate(const ChartMetric& chart, const CurvatureFields& fields, const Eigen::VectorXd& values,
                 const Eigen::VectorXd* weight = nullptr);

}  // namespace scurv
