#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace scurv {

/// Rectangular coordinate grid carrying a metric tensor field and a density
/// exponent f, i.e. the smooth mm-space (M, g, e^{-f} dVol_g) in one chart.
///
/// Axis k has shape[k] nodes at origin[k] + i * spacing[k]. Periodic axes have
/// period shape[k] * spacing[k] and no duplicated end node. Only the leading
/// n x n block of each metric matrix is used; the rest is identity padding.
struct ChartMetric {
  int n = 2;
  std::array<int, 3> shape{1, 1, 1};
  std::array<double, 3> origin{0, 0, 0};
  std::array<double, 3> spacing{1, 1, 1};
  std::array<bool, 3> periodic{false, false, false};
  std::vector<Eigen::Matrix3d> g;
  Eigen::VectorXd f;
  std::string provenance = "raw";

  std::size_t nodes() const;
  int index(int i, int j = 0, int k = 0) const;
  std::array<int, 3> multi_index(int node) const;
  Eigen::Vector3d position(int node) const;
  bool closed() const;
  /// Throws DomainError naming the first node whose metric is not SPD.
  void validate() const;
};

using MetricFn = std::function<Eigen::Matrix3d(const Eigen::Vector3d&)>;
using ScalarFn = std::function<double(const Eigen::Vector3d&)>;

ChartMetric make_chart(int n, std::array<int, 3> shape, std::array<double, 3> origin,
                       std::array<double, 3> spacing, std::array<bool, 3> periodic, const MetricFn& metric,
                       const ScalarFn& density, std::string provenance);

/// Samples a function on the chart nodes.
Eigen::VectorXd sample_field(const ChartMetric& chart, const ScalarFn& fn);

/// Flat torus prod [0, L_k) with `count` nodes per axis.
ChartMetric flat_torus_chart(int n, int count, double length, const ScalarFn& density = {});

/// Flat square [-half, half]^2 (open) with the Gaussian density |x|^2 / 4.
ChartMetric gaussian_density_plane(int count, double half_width);

/// Round sphere of sectional curvature 1 in stereographic coordinates
/// g = 4 / (1 + |u|^2)^2 delta on [-half, half]^2 (open).
ChartMetric round_sphere_patch(int count, double half_width, const ScalarFn& density = {});

/// Round unit sphere in spherical coordinates (theta, phi) on
/// [theta0, theta1] x [0, 2 pi) with g = diag(1, sin^2 theta).
ChartMetric spherical_band(int n_theta, int n_phi, double theta0, double theta1, const ScalarFn& density = {});

/// S^2(1) x R in stereographic-times-line coordinates on [-half, half]^3 (open).
ChartMetric sphere_line_product(int count, double half_width, const ScalarFn& density = {});

/// Chart with an attached partition-of-unity weight.
struct AtlasChart {
  ChartMetric chart;
  Eigen::VectorXd weight;
};

/// Closed surface covered by weighted charts.
struct Atlas {
  std::vector<AtlasChart> charts;
  int euler_characteristic = 0;
  std::string name;
};

/// Two stereographic charts of the unit sphere on [-2, 2]^2 glued by a smooth
/// partition of unity in the height z. `density` is a function of the point
/// (x, y, z) on the sphere.
Atlas sphere_atlas(int count, const ScalarFn& density = {});

/// One fully periodic chart viewed as an atlas with chi = 0 (tori only).
Atlas torus_atlas(const ChartMetric& chart);

/// Seeded random band-limited field sum_k a_k cos(k . x) + b_k sin(k . x)
/// with integer wave vectors |k_i| <= max_mode on a torus of side length `length`.
ScalarFn band_limited_function(int n, int max_mode, double amplitude, double length, std::uint64_t seed);

}  // namespace scurv
