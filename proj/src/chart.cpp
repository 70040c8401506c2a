#include "scurv/chart.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Cholesky>

#include "scurv/errors.hpp"

namespace scurv {

namespace {

constexpr double kPi = std::numbers::pi;

double smoothstep(double t) {
  // C-infinity transition from 0 (t <= 0) to 1 (t >= 1).
  auto psi = [](double s) { return s > 0 ? std::exp(-1 / s) : 0.0; };
  const double a = psi(t);
  const double b = psi(1 - t);
  return a / (a + b);
}

}  // namespace

std::size_t ChartMetric::nodes() const {
  std::size_t total = 1;
  for (int k = 0; k < n; ++k) total *= static_cast<std::size_t>(shape[k]);
  return total;
}

int ChartMetric::index(int i, int j, int k) const { return (i * shape[1] + j) * shape[2] + k; }

std::array<int, 3> ChartMetric::multi_index(int node) const {
  const int k = node % shape[2];
  const int rest = node / shape[2];
  return {rest / shape[1], rest % shape[1], k};
}

Eigen::Vector3d ChartMetric::position(int node) const {
  const auto m = multi_index(node);
  Eigen::Vector3d x = Eigen::Vector3d::Zero();
  for (int a = 0; a < n; ++a) x(a) = origin[a] + m[a] * spacing[a];
  return x;
}

bool ChartMetric::closed() const {
  for (int a = 0; a < n; ++a)
    if (!periodic[a]) return false;
  return true;
}

void ChartMetric::validate() const {
  if (n < 1 || n > 3) throw DomainError("chart: dimension must be 1, 2 or 3");
  for (int a = 0; a < 3; ++a) {
    if (a >= n && shape[a] != 1) throw DomainError("chart: unused axes must have shape 1");
    if (shape[a] < 1 || !(spacing[a] > 0)) throw DomainError("chart: bad shape or spacing");
  }
  if (g.size() != nodes() || static_cast<std::size_t>(f.size()) != nodes()) {
    throw DomainError("chart: field sizes do not match the grid");
  }
  for (std::size_t p = 0; p < g.size(); ++p) {
    const Eigen::MatrixXd block = g[p].topLeftCorner(n, n);
    Eigen::LLT<Eigen::MatrixXd> llt(block);
    if (llt.info() != Eigen::Success || !block.isApprox(block.transpose(), 1e-12) || !block.allFinite()) {
      const auto m = multi_index(static_cast<int>(p));
      throw DomainError("chart: metric not symmetric positive-definite at node (" + std::to_string(m[0]) + "," +
                        std::to_string(m[1]) + "," + std::to_string(m[2]) + ")");
    }
  }
}

ChartMetric make_chart(int n, std::array<int, 3> shape, std::array<double, 3> origin,
                       std::array<double, 3> spacing, std::array<bool, 3> periodic, const MetricFn& metric,
                       const ScalarFn& density, std::string provenance) {
  ChartMetric c;
  c.n = n;
  c.shape = shape;
  c.origin = origin;
  c.spacing = spacing;
  c.periodic = periodic;
  c.provenance = std::move(provenance);
  for (int a = n; a < 3; ++a) c.shape[a] = 1;
  const std::size_t total = c.nodes();
  c.g.resize(total);
  c.f.resize(static_cast<Eigen::Index>(total));
  for (std::size_t p = 0; p < total; ++p) {
    const Eigen::Vector3d x = c.position(static_cast<int>(p));
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
    m.topLeftCorner(n, n) = metric(x).topLeftCorner(n, n);
    c.g[p] = m;
    c.f(static_cast<Eigen::Index>(p)) = density ? density(x) : 0.0;
  }
  c.validate();
  return c;
}

Eigen::VectorXd sample_field(const ChartMetric& chart, const ScalarFn& fn) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(chart.nodes()));
  for (Eigen::Index p = 0; p < out.size(); ++p) out(p) = fn(chart.position(static_cast<int>(p)));
  return out;
}

ChartMetric flat_torus_chart(int n, int count, double length, const ScalarFn& density) {
  if (count < 8) throw DomainError("flat_torus_chart: need at least 8 nodes per axis");
  std::array<int, 3> shape{1, 1, 1};
  std::array<double, 3> spacing{1, 1, 1};
  std::array<bool, 3> periodic{false, false, false};
  for (int a = 0; a < n; ++a) {
    shape[a] = count;
    spacing[a] = length / count;
    periodic[a] = true;
  }
  return make_chart(n, shape, {0, 0, 0}, spacing, periodic,
                    [](const Eigen::Vector3d&) { return Eigen::Matrix3d::Identity(); }, density, "flat_torus");
}

ChartMetric gaussian_density_plane(int count, double half_width) {
  const double h = 2 * half_width / (count - 1);
  return make_chart(
      2, {count, count, 1}, {-half_width, -half_width, 0}, {h, h, 1}, {false, false, false},
      [](const Eigen::Vector3d&) { return Eigen::Matrix3d::Identity(); },
      [](const Eigen::Vector3d& x) { return 0.25 * x.head<2>().squaredNorm(); }, "gaussian_density_plane");
}

ChartMetric round_sphere_patch(int count, double half_width, const ScalarFn& density) {
  const double h = 2 * half_width / (count - 1);
  return make_chart(
      2, {count, count, 1}, {-half_width, -half_width, 0}, {h, h, 1}, {false, false, false},
      [](const Eigen::Vector3d& u) {
        const double c = 2 / (1 + u.head<2>().squaredNorm());
        return Eigen::Matrix3d(Eigen::Vector3d(c * c, c * c, 1).asDiagonal());
      },
      density, "round_sphere_patch");
}

ChartMetric spherical_band(int n_theta, int n_phi, double theta0, double theta1, const ScalarFn& density) {
  if (!(theta0 > 0) || !(theta1 < kPi) || !(theta1 > theta0)) {
    throw DomainError("spherical_band: need 0 < theta0 < theta1 < pi");
  }
  const double ht = (theta1 - theta0) / (n_theta - 1);
  return make_chart(
      2, {n_theta, n_phi, 1}, {theta0, 0, 0}, {ht, 2 * kPi / n_phi, 1}, {false, true, false},
      [](const Eigen::Vector3d& x) {
        const double s = std::sin(x(0));
        return Eigen::Matrix3d(Eigen::Vector3d(1, s * s, 1).asDiagonal());
      },
      density, "spherical_band");
}

ChartMetric sphere_line_product(int count, double half_width, const ScalarFn& density) {
  const double h = 2 * half_width / (count - 1);
  return make_chart(
      3, {count, count, count}, {-half_width, -half_width, -half_width}, {h, h, h}, {false, false, false},
      [](const Eigen::Vector3d& u) {
        const double c = 2 / (1 + u.head<2>().squaredNorm());
        return Eigen::Matrix3d(Eigen::Vector3d(c * c, c * c, 1).asDiagonal());
      },
      density, "sphere_line_product");
}

Atlas sphere_atlas(int count, const ScalarFn& density) {
  Atlas atlas;
  atlas.euler_characteristic = 2;
  atlas.name = "sphere_atlas";
  for (int side = 0; side < 2; ++side) {
    // side 0 projects from the south pole and covers the north cap; side 1
    // is its mirror image under z -> -z.
    const double sign = side == 0 ? 1.0 : -1.0;
    auto embed = [sign](const Eigen::Vector3d& u) {
      const double q = u.head<2>().squaredNorm();
      return Eigen::Vector3d(2 * u(0) / (1 + q), 2 * u(1) / (1 + q), sign * (1 - q) / (1 + q));
    };
    ScalarFn chart_density;
    if (density) chart_density = [density, embed](const Eigen::Vector3d& u) { return density(embed(u)); };
    AtlasChart ac{round_sphere_patch(count, 2.0, chart_density), {}};
    ac.chart.provenance = side == 0 ? "sphere_atlas/north" : "sphere_atlas/south";
    ac.weight = sample_field(ac.chart, [sign, embed](const Eigen::Vector3d& u) {
      // Weight of the north chart rises from 0 at z = -0.3 to 1 at z = 0.3.
      const double z = sign * embed(u)(2);
      return smoothstep((z + 0.3) / 0.6);
    });
    atlas.charts.push_back(std::move(ac));
  }
  return atlas;
}

Atlas torus_atlas(const ChartMetric& chart) {
  Atlas atlas;
  atlas.euler_characteristic = 0;
  atlas.name = "torus";
  atlas.charts.push_back({chart, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(chart.nodes()))});
  return atlas;
}

ScalarFn band_limited_function(int n, int max_mode, double amplitude, double length, std::uint64_t seed) {
  struct Mode {
    Eigen::Vector3d k;
    double a, b;
  };
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<Mode> modes;
  const int m1 = n >= 2 ? max_mode : 0;
  const int m2 = n >= 3 ? max_mode : 0;
  for (int i = 0; i <= max_mode; ++i)
    for (int j = -m1; j <= m1; ++j)
      for (int k = -m2; k <= m2; ++k) {
        if (i == 0 && (j < 0 || (j == 0 && k <= 0))) continue;  // one of each +-k pair, no constant
        const Eigen::Vector3d wave(i, j, k);
        const double decay = amplitude / (1 + wave.squaredNorm());
        modes.push_back({wave * (2 * kPi / length), decay * normal(rng), decay * normal(rng)});
      }
  return [modes](const Eigen::Vector3d& x) {
    double s = 0;
    for (const auto& m : modes) {
      const double phase = m.k.dot(x);
      s += m.a * std::cos(phase) + m.b * std::sin(phase);
    }
    return s;
  };
}

}  // namespace scurv
