#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "scurv/chart.hpp"
#include "scurv/spectral.hpp"

namespace scurv {

/// Closed hypersurface of a chart given by a periodic parametrization on a
/// structured grid: a closed curve in a 2-chart, or a doubly periodic surface
/// (torus of revolution and the like) in a 3-chart. Parameters run over
/// [0, 2 pi) in every direction.
///
/// Conventions: nu is the g-unit normal along the covector (X_u^2, -X_u^1) for
/// curves and X_u x X_v for surfaces, flipped by `orientation`;
/// A_ab = <nabla_a nu, X_b> and H = tr A = div nu, so the counterclockwise unit
/// circle in the flat plane has H = +1.
struct DiscreteHypersurface {
  std::shared_ptr<const ChartMetric> ambient;
  int dim = 1;
  std::array<int, 2> counts{1, 1};
  std::string kind;
  std::vector<Eigen::Vector3d> position;
  std::vector<std::array<Eigen::Vector3d, 2>> tangent;
  std::vector<Eigen::Vector3d> normal;  // contravariant components
  std::vector<Eigen::Matrix2d> induced;
  std::vector<Eigen::Matrix2d> second_fundamental;
  Eigen::VectorXd mean_curvature;
  Eigen::VectorXd a_norm2;
  Eigen::VectorXd f;
  Eigen::VectorXd normal_derivative_f;  // <grad f, nu>
  Eigen::VectorXd ric_f_normal;         // Ric_f(nu, nu)

  std::size_t nodes() const { return position.size(); }
  /// Max deviation of |nu|_g from 1.
  double normal_defect() const;
};

using ParamFn = std::function<Eigen::Vector3d(const Eigen::Vector2d&)>;

/// Samples the parametrization on `counts` nodes per parameter, differentiates
/// it spectrally and evaluates the ambient fields by interpolation.
DiscreteHypersurface make_hypersurface(std::shared_ptr<const ChartMetric> ambient, std::array<int, 2> counts,
                                       const ParamFn& param, int orientation = 1, std::string kind = "custom");

/// Circle of radius r around `center` in a 2-chart, starting at angle `phase`.
DiscreteHypersurface circle_hypersurface(std::shared_ptr<const ChartMetric> ambient, Eigen::Vector2d center,
                                         double radius, int count, double phase = 0);

/// Coordinate line theta = theta0 of a (theta, phi) chart, e.g. the equator of spherical_band.
DiscreteHypersurface latitude_hypersurface(std::shared_ptr<const ChartMetric> ambient, double theta0, int count,
                                           double phase = 0);

/// Torus of revolution about the x3 axis with radii (major, minor) in a 3-chart.
DiscreteHypersurface torus_of_revolution(std::shared_ptr<const ChartMetric> ambient, Eigen::Vector3d center,
                                         double major, double minor, std::array<int, 2> counts);

/// H_f = H - <grad f, nu>, which vanishes on the Gaussian shrinker circle.
Eigen::VectorXd weighted_mean_curvature(const DiscreteHypersurface& s);

double f_minimal_residual(const DiscreteHypersurface& s);

/// Weighted mean curvature of the round sphere of radius r in R^n with
/// f = |x|^2 / 4 and outward normal: (n - 1)/r - r/2.
double gaussian_sphere_hf(int n, double r);

/// Root of a sign-changing function on (lo, hi) by bisection to `tol`.
double bisect_root(const std::function<double(double)>& fn, double lo, double hi, double tol = 1e-12);

/// Radius of the f-minimal sphere for f = |x|^2 / 4 in R^n.
double shrinker_radius(int n);

/// The induced closed chart (N, g_bar, f|_N) on the parameter grid.
ChartMetric induced_chart(const DiscreteHypersurface& s);

/// L_f = Delta_f + |A|^2 + Ric_f(nu, nu) on the induced metric, self-adjoint in e^{-f} dVol_{g_bar}.
OperatorMatrix stability_operator(const DiscreteHypersurface& s);

struct StabilityIndex {
  int index = 0;         // eigenvalues of -L_f below -kernel_band
  int strict_index = 0;  // eigenvalues below -1e-8
  int near_kernel = 0;   // eigenvalues within the band
  double kernel_band = 0;
  Eigen::VectorXd spectrum;  // eigenvalues of -L_f, ascending
  bool stable() const { return index == 0; }
};

/// Counts negative eigenvalues of -L_f with a dense eigensolver. Eigenvalues of
/// magnitude below `kernel_band` (discretization error of exact kernel modes
/// such as rotations) are reported separately. A negative band selects
/// max(1e-8, (h_s^2 + h_c^2)(1 + max |potential|)) from the surface and chart spacings.
StabilityIndex lf_stability_index(const DiscreteHypersurface& s, double kernel_band = -1);

struct ConformalMinimalReport {
  double residual = 0;     // max |H_tilde - e^{f/(n-1)} H_f|
  double hf_max = 0;       // max |H_f| in (g, f)
  double h_tilde_max = 0;  // max |H_tilde| in g_tilde = e^{-2f/(n-1)} g
};

/// Compares the weighted mean curvature in (g, f) with the plain mean
/// curvature of the same parametrization in g_tilde = e^{-2f/(n-1)} g.
ConformalMinimalReport conformal_minimal_check(const std::shared_ptr<const ChartMetric>& ambient,
                                               std::array<int, 2> counts, const ParamFn& param,
                                               int orientation = 1);

}  // namespace scurv
