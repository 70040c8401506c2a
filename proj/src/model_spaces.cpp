#include "scurv/model_spaces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "scurv/errors.hpp"
#include "scurv/quadrature.hpp"

namespace scurv {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kQuadTol = 1e-12;

// Absolute tolerance for an integral whose magnitude is comparable to the
// Euclidean ball volume; tightened for tiny balls so expansion fits keep
// their relative accuracy.
double quad_tol(int n, double r) {
  const double scale = r > 0 ? euclidean_ball_volume(n, r) : 1.0;
  return kQuadTol * std::min(1.0, scale);
}

}  // namespace

double unit_ball_volume(int n) {
  if (n < 0) throw DomainError("unit_ball_volume: negative dimension");
  return std::pow(kPi, n / 2.0) / std::tgamma(n / 2.0 + 1.0);
}

double unit_sphere_area(int n) {
  if (n < 1) throw DomainError("unit_sphere_area: dimension must be >= 1");
  return n * unit_ball_volume(n);
}

double euclidean_ball_volume(int n, double r) {
  if (n < 1) throw DomainError("euclidean_ball_volume: dimension must be >= 1");
  if (r < 0) throw DomainError("euclidean_ball_volume: negative radius");
  return unit_ball_volume(n) * std::pow(r, n);
}

double sphere_ball_volume(int n, double sec, double r) {
  if (n < 2) throw DomainError("sphere_ball_volume: dimension must be >= 2");
  if (!(sec > 0)) throw DomainError("sphere_ball_volume: sectional curvature must be positive");
  if (r < 0) throw DomainError("sphere_ball_volume: negative radius");
  const double radius = 1.0 / std::sqrt(sec);
  const double rr = std::min(r, kPi * radius);
  if (rr == 0) return 0.0;
  auto integrand = [&](double t) { return std::pow(radius * std::sin(t / radius), n - 1); };
  return unit_sphere_area(n) * adaptive_simpson(integrand, 0.0, rr, quad_tol(n, rr) / unit_sphere_area(n));
}

double product_ball_volume(double gamma, int n, double r) {
  if (!(gamma > 0)) throw DomainError("product_ball_volume: gamma must be positive");
  if (n < 2) throw DomainError("product_ball_volume: dimension must be >= 2");
  if (r < 0) throw DomainError("product_ball_volume: negative radius");
  if (n == 2) return sphere_ball_volume(2, 1.0 / (gamma * gamma), r);
  if (r == 0) return 0.0;
  // rho = r sin(theta) removes the endpoint singularity of (r^2 - rho^2)^{(n-2)/2}.
  const double theta_max = r <= kPi * gamma ? kPi / 2 : std::asin(kPi * gamma / r);
  const double flat = unit_ball_volume(n - 2);
  auto integrand = [&](double theta) {
    const double rho = r * std::sin(theta);
    const double c = r * std::cos(theta);
    return 2 * kPi * gamma * std::sin(rho / gamma) * flat * std::pow(c, n - 2) * c;
  };
  return adaptive_simpson(integrand, 0.0, theta_max, quad_tol(n, r));
}

int dimension(const ModelSpace& model) {
  return std::visit([](const auto& m) { return m.n; }, model);
}

double scalar_curvature(const ModelSpace& model) {
  struct {
    double operator()(const Euclidean&) const { return 0.0; }
    double operator()(const RoundSphere& s) const { return s.n * (s.n - 1) * s.sec; }
    double operator()(const ProductS2xE& p) const { return 2.0 / (p.gamma * p.gamma); }
  } visitor;
  return std::visit(visitor, model);
}

double ball_volume(const ModelSpace& model, double r) {
  struct {
    double r;
    double operator()(const Euclidean& e) const { return euclidean_ball_volume(e.n, r); }
    double operator()(const RoundSphere& s) const { return sphere_ball_volume(s.n, s.sec, r); }
    double operator()(const ProductS2xE& p) const { return product_ball_volume(p.gamma, p.n, r); }
  } visitor{r};
  return std::visit(visitor, model);
}

double diameter(const ModelSpace& model) {
  struct {
    double operator()(const Euclidean&) const { return std::numeric_limits<double>::infinity(); }
    double operator()(const RoundSphere& s) const { return kPi / std::sqrt(s.sec); }
    double operator()(const ProductS2xE& p) const {
      return p.n == 2 ? kPi * p.gamma : std::numeric_limits<double>::infinity();
    }
  } visitor;
  return std::visit(visitor, model);
}

std::string describe(const ModelSpace& model) {
  std::ostringstream os;
  struct {
    std::ostringstream& os;
    void operator()(const Euclidean& e) const { os << "R^" << e.n; }
    void operator()(const RoundSphere& s) const { os << "S^" << s.n << "(sec=" << s.sec << ")"; }
    void operator()(const ProductS2xE& p) const {
      os << "S^2(" << p.gamma << ") x R^" << (p.n - 2);
    }
  } visitor{os};
  std::visit(visitor, model);
  return os.str();
}

void validate(const ModelSpace& model) {
  struct {
    void operator()(const Euclidean& e) const {
      if (e.n < 1) throw DomainError("Euclidean model: n must be >= 1");
    }
    void operator()(const RoundSphere& s) const {
      if (s.n < 2) throw DomainError("RoundSphere model: n must be >= 2");
      if (!(s.sec > 0)) throw DomainError("RoundSphere model: sec must be positive");
    }
    void operator()(const ProductS2xE& p) const {
      if (p.n < 2) throw DomainError("ProductS2xE model: n must be >= 2");
      if (!(p.gamma > 0)) throw DomainError("ProductS2xE model: gamma must be positive");
    }
  } visitor;
  std::visit(visitor, model);
}

double bg_radius_cap(int n, double kappa) {
  if (kappa <= 0) return std::numeric_limits<double>::infinity();
  return kPi * std::sqrt((n - 1) / kappa);
}

double bg_profile(int n, double kappa, double r) {
  if (n < 2) throw DomainError("bg_profile: dimension must be >= 2");
  if (kappa < 0) throw DomainError("bg_profile: kappa must be nonnegative");
  if (!(r > 0)) throw DomainError("bg_profile: radius must be positive");
  if (kappa == 0) return 1.0;
  if (r > bg_radius_cap(n, kappa) * (1 + 1e-12)) {
    throw DomainError("bg_profile: radius beyond pi*sqrt((n-1)/kappa)");
  }
  return sphere_ball_volume(n, kappa / (n - 1), r) / euclidean_ball_volume(n, r);
}

double bg_ratio(int n, double kappa, double r, double big_r) {
  if (!(r > 0) || !(big_r >= r)) throw DomainError("bg_ratio: need 0 < r <= R");
  if (kappa == 0) return std::pow(r / big_r, n);
  if (big_r > bg_radius_cap(n, kappa) * (1 + 1e-12)) {
    throw DomainError("bg_ratio: radius beyond pi*sqrt((n-1)/kappa)");
  }
  return sphere_ball_volume(n, kappa / (n - 1), r) / sphere_ball_volume(n, kappa / (n - 1), big_r);
}

}  // namespace scurv
