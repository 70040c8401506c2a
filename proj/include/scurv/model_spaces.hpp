#pragma once

#include <string>
#include <variant>

namespace scurv {

/// Flat R^n with Lebesgue measure.
struct Euclidean {
  int n = 2;
};

/// Round n-sphere of constant sectional curvature `sec`.
struct RoundSphere {
  int n = 2;
  double sec = 1.0;
};

/// S^2(gamma) x R^{n-2} with the Pythagorean product metric and product volume.
struct ProductS2xE {
  double gamma = 1.0;
  int n = 2;
};

using ModelSpace = std::variant<Euclidean, RoundSphere, ProductS2xE>;

/// Volume of the unit ball in R^n.
double unit_ball_volume(int n);

/// Area of the unit (n-1)-sphere bounding the unit ball of R^n.
double unit_sphere_area(int n);

double euclidean_ball_volume(int n, double r);

/// Geodesic r-ball volume in the round n-sphere of sectional curvature sec.
/// Radii past the diameter pi/sqrt(sec) return the total volume.
double sphere_ball_volume(int n, double sec, double r);

/// r-ball volume in S^2(gamma) x R^{n-2} by the coarea integral over the
/// sphere-factor distance.
double product_ball_volume(double gamma, int n, double r);

int dimension(const ModelSpace& model);
double scalar_curvature(const ModelSpace& model);
double ball_volume(const ModelSpace& model, double r);
/// Radius past which balls cover the whole space (infinity for non-compact models).
double diameter(const ModelSpace& model);
std::string describe(const ModelSpace& model);
void validate(const ModelSpace& model);

/// Normalized Bishop-Gromov profile: the ratio of the r-ball volume in the
/// n-sphere of sectional curvature kappa/(n-1) to the Euclidean r-ball volume.
/// For kappa = 0 the profile is identically one, so ratios reduce to (r/R)^n.
double bg_profile(int n, double kappa, double r);

/// Lower bound for mu(B_r)/mu(B_R) implied by the generalized Bishop-Gromov
/// inequality with parameters (kappa, n).
double bg_ratio(int n, double kappa, double r, double big_r);

/// Largest admissible radius for the profile (pi*sqrt((n-1)/kappa), or infinity).
double bg_radius_cap(int n, double kappa);

}  // namespace scurv
