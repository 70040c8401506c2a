#pragma once

#include <array>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "scurv/chart.hpp"
#include "scurv/fit.hpp"

namespace scurv {

/// C^1 Catmull-Rom interpolation of the metric and density of a chart, with
/// exact derivatives of the interpolant. Periodic axes wrap; open axes clamp.
class ChartInterpolant {
 public:
  explicit ChartInterpolant(const ChartMetric& chart);

  struct Sample {
    Eigen::Matrix3d g;
    std::array<Eigen::Matrix3d, 3> dg;
    double f = 0;
  };

  Sample eval(const Eigen::Vector3d& x) const;
  /// Interpolated f and its coordinate gradient.
  std::pair<double, Eigen::Vector3d> density(const Eigen::Vector3d& x) const;
  /// Interpolates any nodal field of the chart.
  double field(const Eigen::VectorXd& values, const Eigen::Vector3d& x) const;
  Eigen::Matrix3d field(const std::vector<Eigen::Matrix3d>& values, const Eigen::Vector3d& x) const;
  /// True while x lies inside the chart (always true along periodic axes).
  bool inside(const Eigen::Vector3d& x) const;
  const ChartMetric& chart() const { return *chart_; }

 private:
  struct Stencil {
    int count = 0;
    std::array<int, 64> node{};
    std::array<double, 64> w{};
    std::array<std::array<double, 3>, 64> dw{};
  };
  Stencil stencil(const Eigen::Vector3d& x) const;

  const ChartMetric* chart_;
};

struct GeodesicConfig {
  int steps = 256;     // RK4 steps from 0 to the largest radius
  int angles = 64;     // azimuthal trapezoid nodes
  int polar = 32;      // Gauss-Legendre nodes in cos(polar angle), n = 3
  double delta = 1e-4; // initial-direction offset for the Jacobian
};

struct BallVolumes {
  std::vector<double> radii;
  std::vector<double> volumes;   // weighted volumes of geodesic balls
  std::vector<double> ratios;    // volume / (e^{-f(x)} vol_E(B_r))
  std::vector<double> richardson;  // |V(steps) - V(steps/2)| estimate per radius
};

/// Weighted volumes int_{B_r(x)} e^{-f} dVol_g for r = radii (ascending),
/// by geodesic polar coordinates around node x.
BallVolumes weighted_ball_volumes(const ChartMetric& chart, int node, const std::vector<double>& radii,
                                  const GeodesicConfig& config = {});

double weighted_ball_volume(const ChartMetric& chart, int node, double r, const GeodesicConfig& config = {});

struct ExpansionReport {
  ExpansionFit fit;
  double deficit = 0;        // fitted: ratio = 1 - deficit r^2 + ...
  double predicted = 0;      // (Sc + 3 Delta f - 3 |grad f|^2) / (6 (n + 2))
  double relative_error = 0; // |deficit - predicted| / max(|predicted|, floor)
  double predicted_r4 = 0;   // (-3 |Rie|^2 + 8 |Ric|^2 + 5 Sc^2) / (360 (n + 2)(n + 4)), f = 0
  BallVolumes volumes;
};

/// Fits the small-radius expansion of the weighted ball ratio over radii
/// r_hi * j / 16 inside [r_lo, r_hi] and compares with the curvature prediction.
ExpansionReport volume_expansion_fit(const ChartMetric& chart, int node, double r_lo, double r_hi,
                                     bool quartic = true, const GeodesicConfig& config = {});

}  // namespace scurv
