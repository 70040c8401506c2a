#include "scurv/generators.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "scurv/errors.hpp"
#include "scurv/model_spaces.hpp"

namespace scurv {

namespace {

constexpr double kPi = std::numbers::pi;

int rounded(double x) { return std::max(1, static_cast<int>(std::lround(x))); }

// Position inside a unit cell: the center for lattices, uniform otherwise.
double offset(Sampling mode, std::mt19937_64& rng) {
  if (mode == Sampling::lattice || mode == Sampling::exact) return 0.5;
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace

Eigen::MatrixXd random_rotation(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR();
  for (int j = 0; j < n; ++j)
    if (r(j, j) < 0) q.col(j) *= -1;
  return q;
}

FiniteMMSpace sphere_sample(int n, double sec, int count, Sampling mode, std::uint64_t seed) {
  if (n < 1) throw DomainError("sphere_sample: dimension must be >= 1");
  if (!(sec > 0)) throw DomainError("sphere_sample: sectional curvature must be positive");
  if (count < 1) throw DomainError("sphere_sample: need at least one point");
  if (mode == Sampling::exact) mode = Sampling::lattice;
  const double radius = 1.0 / std::sqrt(sec);
  const double total = sphere_ball_volume(n, sec, kPi * radius);
  std::mt19937_64 rng(seed);
  std::vector<Eigen::VectorXd> pts;
  std::vector<double> weights;  // cell volumes of the unit sphere

  if (count == 1) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(n + 1);
    p(n) = 1;
    pts.push_back(p);
  } else if (mode == Sampling::iid) {
    std::normal_distribution<double> normal;
    for (int k = 0; k < count; ++k) {
      Eigen::VectorXd p(n + 1);
      for (int i = 0; i <= n; ++i) p(i) = normal(rng);
      pts.push_back(p.normalized());
    }
  } else if (n == 2) {
    // Zonal partition: bands of equal polar width, each cut into cells of
    // nearly the target area, so cells stay roughly square up to the poles.
    const double target = 4 * kPi / count;
    const int bands = rounded(kPi / std::sqrt(target));
    for (int a = 0; a < bands; ++a) {
      const double z0 = std::cos(kPi * a / bands);
      const double z1 = std::cos(kPi * (a + 1) / bands);
      const int cells = rounded(2 * kPi * (z0 - z1) / target);
      const double shift = offset(mode, rng);
      for (int b = 0; b < cells; ++b) {
        const double z = z0 + (z1 - z0) * offset(mode, rng);
        const double phi = 2 * kPi * (b + (mode == Sampling::lattice ? 0.5 : offset(mode, rng)) + shift) / cells;
        const double s = std::sqrt(std::max(0.0, 1 - z * z));
        Eigen::VectorXd p(3);
        p << s * std::cos(phi), s * std::sin(phi), z;
        pts.push_back(p);
        weights.push_back(2 * kPi * (z0 - z1) / cells);
      }
    }
  } else if (n == 3) {
    // Hopf coordinates x = (cos eta e^{i xi1}, sin eta e^{i xi2}) with
    // dvol = (1/2) d(sin^2 eta) dxi1 dxi2. Slabs of equal eta width are cut
    // into k1 x k2 cells with k1 : k2 close to cos eta : sin eta.
    const double target = 2 * kPi * kPi / count;
    const int slabs = rounded(0.5 * kPi / std::cbrt(target));
    for (int a = 0; a < slabs; ++a) {
      const double u0 = std::pow(std::sin(0.5 * kPi * a / slabs), 2);
      const double u1 = std::pow(std::sin(0.5 * kPi * (a + 1) / slabs), 2);
      const double vol = 2 * kPi * kPi * (u1 - u0);
      const double eta = 0.5 * kPi * (a + 0.5) / slabs;
      const int cells = rounded(vol / target);
      const int k1 = rounded(std::sqrt(cells / std::tan(eta)));
      const int k2 = rounded(static_cast<double>(cells) / k1);
      const double s1 = offset(mode, rng), s2 = offset(mode, rng);
      for (int b = 0; b < k1; ++b)
        for (int c = 0; c < k2; ++c) {
          const double u = u0 + (u1 - u0) * offset(mode, rng);
          const double xi1 = 2 * kPi * (b + (mode == Sampling::lattice ? 0.5 : offset(mode, rng)) + s1) / k1;
          const double xi2 = 2 * kPi * (c + (mode == Sampling::lattice ? 0.5 : offset(mode, rng)) + s2) / k2;
          const double ce = std::sqrt(1 - u);
          const double se = std::sqrt(u);
          Eigen::VectorXd p(4);
          p << ce * std::cos(xi1), ce * std::sin(xi1), se * std::cos(xi2), se * std::sin(xi2);
          pts.push_back(p);
          weights.push_back(vol / (k1 * k2));
        }
    }
  } else {
    throw DomainError("sphere_sample: lattice and stratified modes support n = 2, 3; use iid");
  }

  const int m = static_cast<int>(pts.size());
  EmbeddedMetric metric;
  metric.kind = EmbeddedMetric::Kind::sphere;
  metric.radius = radius;
  metric.coords.resize(m, n + 1);
  Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(n + 1, n + 1);
  if (seed != 0) rot = random_rotation(n + 1, seed ^ 0x9e3779b97f4a7c15ULL);
  for (int k = 0; k < m; ++k) metric.coords.row(k) = (rot * pts[k]).transpose() * radius;
  Eigen::VectorXd mass(m);
  const double unit_scale = total / sphere_ball_volume(n, 1.0, kPi);
  for (int k = 0; k < m; ++k) mass(k) = weights.empty() ? total / m : weights[k] * unit_scale;
  return FiniteMMSpace(std::move(metric), std::move(mass), n, m == 1 ? Sampling::exact : mode, 1.0,
                       "sphere(n=" + std::to_string(n) + ", sec=" + std::to_string(sec) + ")");
}

FiniteMMSpace flat_torus_grid(const std::vector<double>& lengths, const std::vector<int>& counts) {
  if (lengths.empty() || lengths.size() != counts.size()) {
    throw DomainError("flat_torus_grid: lengths and counts must have equal nonzero size");
  }
  const int dim = static_cast<int>(lengths.size());
  int total = 1;
  double cell = 1;
  for (int k = 0; k < dim; ++k) {
    if (!(lengths[k] > 0) || counts[k] < 1) throw DomainError("flat_torus_grid: bad side or count");
    total *= counts[k];
    cell *= lengths[k] / counts[k];
  }
  EmbeddedMetric metric;
  metric.kind = EmbeddedMetric::Kind::flat_torus;
  metric.coords.resize(total, dim);
  metric.periods.resize(dim);
  for (int k = 0; k < dim; ++k) metric.periods(k) = lengths[k];
  for (int idx = 0; idx < total; ++idx) {
    int rest = idx;
    for (int k = dim - 1; k >= 0; --k) {
      const int i = rest % counts[k];
      rest /= counts[k];
      metric.coords(idx, k) = (i + 0.5) * lengths[k] / counts[k];
    }
  }
  Eigen::VectorXd mass = Eigen::VectorXd::Constant(total, cell);
  return FiniteMMSpace(std::move(metric), std::move(mass), dim, Sampling::lattice, 1.0, "flat_torus");
}

FiniteMMSpace hyperbolic_disk(double rho, int count, Sampling mode, std::uint64_t seed) {
  if (!(rho > 0)) throw DomainError("hyperbolic_disk: radius must be positive");
  if (count < 1) throw DomainError("hyperbolic_disk: need at least one point");
  if (mode == Sampling::exact) mode = Sampling::lattice;
  std::mt19937_64 rng(seed);
  const double cmax = std::cosh(rho);
  // Area element sinh(r) dr dtheta: cosh(r) is uniform for area. Rings are
  // chosen so that cells are roughly square.
  const double area = 2 * kPi * (cmax - 1);
  const double cell = area / count;
  const int rings = rounded(rho / std::sqrt(cell));
  std::vector<Eigen::Vector3d> pts;
  std::vector<int> per_ring(rings);
  for (int a = 0; a < rings; ++a) {
    const double c0 = 1 + (cmax - 1) * a / rings;
    const double c1 = 1 + (cmax - 1) * (a + 1) / rings;
    const double mid = std::acosh(0.5 * (c0 + c1));
    per_ring[a] = rounded(2 * kPi * std::sinh(mid) * (std::acosh(c1) - std::acosh(c0)) / cell);
  }
  for (int a = 0; a < rings; ++a) {
    const int k = per_ring[a];
    for (int b = 0; b < k; ++b) {
      const double c = 1 + (cmax - 1) * (a + offset(mode, rng)) / rings;
      const double th = 2 * kPi * (b + offset(mode, rng)) / k;
      const double s = std::sqrt(c * c - 1);
      pts.emplace_back(c, s * std::cos(th), s * std::sin(th));
    }
  }
  const int m = static_cast<int>(pts.size());
  EmbeddedMetric metric;
  metric.kind = EmbeddedMetric::Kind::hyperbolic;
  metric.coords.resize(m, 3);
  Eigen::VectorXd mass(m);
  int idx = 0;
  for (int a = 0; a < rings; ++a) {
    const double ring_area = area / rings;
    for (int b = 0; b < per_ring[a]; ++b, ++idx) {
      metric.coords.row(idx) = pts[idx].transpose();
      mass(idx) = ring_area / per_ring[a];
    }
  }
  return FiniteMMSpace(std::move(metric), std::move(mass), 2, mode, 1.0, "hyperbolic_disk");
}

FiniteMMSpace interval_grid(double length, int count) {
  if (!(length > 0) || count < 1) throw DomainError("interval_grid: bad length or count");
  EmbeddedMetric metric;
  metric.kind = EmbeddedMetric::Kind::euclidean;
  metric.coords.resize(count, 1);
  for (int i = 0; i < count; ++i) metric.coords(i, 0) = (i + 0.5) * length / count;
  Eigen::VectorXd mass = Eigen::VectorXd::Constant(count, length / count);
  return FiniteMMSpace(std::move(metric), std::move(mass), 1, Sampling::lattice, 1.0, "interval");
}

FiniteMMSpace point_space(double mass, int dim_hint) {
  DenseMetric metric{Eigen::MatrixXd::Zero(1, 1)};
  return FiniteMMSpace(std::move(metric), Eigen::VectorXd::Constant(1, mass), dim_hint, Sampling::exact, 1.0,
                       "point");
}

}  // namespace scurv
