#include "scurv/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>

#include "scurv/curvature.hpp"
#include "scurv/errors.hpp"
#include "scurv/model_spaces.hpp"
#include "scurv/quadrature.hpp"

namespace scurv {

namespace {

constexpr double kPi = std::numbers::pi;

// Catmull-Rom weights for nodes -1..2 at parameter t, and their t-derivatives.
void catmull_rom(double t, double w[4], double dw[4]) {
  const double t2 = t * t, t3 = t2 * t;
  w[0] = 0.5 * (-t3 + 2 * t2 - t);
  w[1] = 0.5 * (3 * t3 - 5 * t2 + 2);
  w[2] = 0.5 * (-3 * t3 + 4 * t2 + t);
  w[3] = 0.5 * (t3 - t2);
  dw[0] = 0.5 * (-3 * t2 + 4 * t - 1);
  dw[1] = 0.5 * (9 * t2 - 10 * t);
  dw[2] = 0.5 * (-9 * t2 + 8 * t + 1);
  dw[3] = 0.5 * (3 * t2 - 2 * t);
}

struct State {
  Eigen::Vector3d x;
  Eigen::Vector3d v;
};

}  // namespace

ChartInterpolant::ChartInterpolant(const ChartMetric& chart) : chart_(&chart) { chart.validate(); }

bool ChartInterpolant::inside(const Eigen::Vector3d& x) const {
  const auto& c = *chart_;
  for (int a = 0; a < c.n; ++a) {
    if (c.periodic[a]) continue;
    const double lo = c.origin[a];
    const double hi = c.origin[a] + (c.shape[a] - 1) * c.spacing[a];
    if (x(a) < lo || x(a) > hi) return false;
  }
  return true;
}

ChartInterpolant::Stencil ChartInterpolant::stencil(const Eigen::Vector3d& x) const {
  const auto& c = *chart_;
  const int n = c.n;
  int base[3] = {0, 0, 0};
  double w[3][4], dw[3][4];
  for (int a = 0; a < 3; ++a) {
    if (a >= n) {
      for (int i = 0; i < 4; ++i) w[a][i] = dw[a][i] = 0;
      w[a][1] = 1;
      continue;
    }
    const double s = (x(a) - c.origin[a]) / c.spacing[a];
    double fl = std::floor(s);
    if (!c.periodic[a]) fl = std::clamp(fl, 0.0, static_cast<double>(c.shape[a] - 2));
    base[a] = static_cast<int>(fl);
    catmull_rom(s - fl, w[a], dw[a]);
    for (double& d : dw[a]) d /= c.spacing[a];
  }
  auto node_index = [&](int a, int off) {
    if (a >= n) return 0;
    const int i = base[a] + off;
    if (c.periodic[a]) return ((i % c.shape[a]) + c.shape[a]) % c.shape[a];
    return std::clamp(i, 0, c.shape[a] - 1);
  };
  Stencil st;
  const int span[3] = {4, n >= 2 ? 4 : 1, n >= 3 ? 4 : 1};
  for (int i = 0; i < span[0]; ++i) {
    for (int j = 0; j < span[1]; ++j) {
      const int jw = n >= 2 ? j : 1;
      for (int k = 0; k < span[2]; ++k) {
        const int kw = n >= 3 ? k : 1;
        const int e = st.count++;
        st.node[e] = c.index(node_index(0, i - 1), node_index(1, j - 1), node_index(2, k - 1));
        st.w[e] = w[0][i] * w[1][jw] * w[2][kw];
        st.dw[e] = {dw[0][i] * w[1][jw] * w[2][kw], w[0][i] * dw[1][jw] * w[2][kw], w[0][i] * w[1][jw] * dw[2][kw]};
      }
    }
  }
  return st;
}

ChartInterpolant::Sample ChartInterpolant::eval(const Eigen::Vector3d& x) const {
  const auto& c = *chart_;
  const Stencil st = stencil(x);
  Sample out;
  out.g.setZero();
  for (auto& d : out.dg) d.setZero();
  for (int e = 0; e < st.count; ++e) {
    const Eigen::Matrix3d& gp = c.g[st.node[e]];
    out.g += st.w[e] * gp;
    out.f += st.w[e] * c.f(st.node[e]);
    for (int a = 0; a < c.n; ++a) out.dg[a] += st.dw[e][a] * gp;
  }
  for (int a = c.n; a < 3; ++a) out.g(a, a) = 1;
  return out;
}

std::pair<double, Eigen::Vector3d> ChartInterpolant::density(const Eigen::Vector3d& x) const {
  const Stencil st = stencil(x);
  double v = 0;
  Eigen::Vector3d d = Eigen::Vector3d::Zero();
  for (int e = 0; e < st.count; ++e) {
    const double fv = chart_->f(st.node[e]);
    v += st.w[e] * fv;
    for (int a = 0; a < chart_->n; ++a) d(a) += st.dw[e][a] * fv;
  }
  return {v, d};
}

double ChartInterpolant::field(const Eigen::VectorXd& values, const Eigen::Vector3d& x) const {
  const Stencil st = stencil(x);
  double v = 0;
  for (int e = 0; e < st.count; ++e) v += st.w[e] * values(st.node[e]);
  return v;
}

Eigen::Matrix3d ChartInterpolant::field(const std::vector<Eigen::Matrix3d>& values, const Eigen::Vector3d& x) const {
  const Stencil st = stencil(x);
  Eigen::Matrix3d v = Eigen::Matrix3d::Zero();
  for (int e = 0; e < st.count; ++e) v += st.w[e] * values[st.node[e]];
  return v;
}

namespace {

Eigen::Vector3d acceleration(const ChartInterpolant& interp, int n, const State& s) {
  const auto smp = interp.eval(s.x);
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  Eigen::Matrix3d ginv = Eigen::Matrix3d::Zero();
  ginv.topLeftCorner(n, n) = smp.g.topLeftCorner(n, n).inverse();
  // Gamma_{l,ij} v^i v^j = (d_i g_jl + d_j g_il - d_l g_ij) v^i v^j / 2.
  Eigen::Vector3d low = Eigen::Vector3d::Zero();
  for (int l = 0; l < n; ++l) {
    double s1 = 0, s2 = 0;
    for (int i = 0; i < n; ++i) s1 += s.v(i) * (smp.dg[i].row(l).head(n).dot(s.v.head(n)));
    s2 = s.v.head(n).dot(smp.dg[l].topLeftCorner(n, n) * s.v.head(n));
    low(l) = s1 - 0.5 * s2;
  }
  acc.head(n) = -ginv.topLeftCorner(n, n) * low.head(n);
  return acc;
}

}  // namespace

BallVolumes weighted_ball_volumes(const ChartMetric& chart, int node, const std::vector<double>& radii,
                                  const GeodesicConfig& config) {
  if (radii.empty()) throw DomainError("weighted_ball_volumes: no radii");
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] > 0) || (k > 0 && radii[k] < radii[k - 1])) {
      throw DomainError("weighted_ball_volumes: radii must be positive and ascending");
    }
  }
  if (node < 0 || static_cast<std::size_t>(node) >= chart.nodes()) throw DomainError("weighted_ball_volumes: node");
  const int n = chart.n;
  if (n < 2) throw DomainError("weighted_ball_volumes: n >= 2 required");
  const ChartInterpolant interp(chart);
  const Eigen::Vector3d x0 = chart.position(node);
  const auto s0 = interp.eval(x0);
  // Orthonormal frame: columns of L^{-T} with g = L L^T.
  const Eigen::MatrixXd gl = s0.g.topLeftCorner(n, n);
  const Eigen::MatrixXd frame = Eigen::LLT<Eigen::MatrixXd>(gl).matrixL().transpose().solve(
      Eigen::MatrixXd::Identity(n, n));
  const double r_max = radii.back();
  const int steps = config.steps + (config.steps % 2);

  // Integrand J(t) e^{-f} along one geodesic at the step points, for both the
  // full step and every second step (Richardson check).
  struct Ray {
    std::vector<Eigen::Vector3d> pos, vel;
  };
  auto shoot = [&](const Eigen::VectorXd& dir) {
    Ray ray;
    State s{x0, Eigen::Vector3d::Zero()};
    s.v.head(n) = frame * dir;
    const double dt = r_max / steps;
    ray.pos.push_back(s.x);
    ray.vel.push_back(s.v);
    for (int k = 0; k < steps; ++k) {
      auto deriv = [&](const State& st) { return State{st.v, acceleration(interp, n, st)}; };
      auto add = [](const State& a, const State& d, double h) { return State{a.x + h * d.x, a.v + h * d.v}; };
      const State k1 = deriv(s);
      const State k2 = deriv(add(s, k1, dt / 2));
      const State k3 = deriv(add(s, k2, dt / 2));
      const State k4 = deriv(add(s, k3, dt));
      s.x += dt / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
      s.v += dt / 6 * (k1.v + 2 * k2.v + 2 * k3.v + k4.v);
      if (!interp.inside(s.x)) {
        throw DomainError("weighted_ball_volume: geodesic leaves the chart at radius " +
                          std::to_string((k + 1) * dt));
      }
      ray.pos.push_back(s.x);
      ray.vel.push_back(s.v);
    }
    return ray;
  };

  // Directions parametrized by (theta) for n = 2 and (u = cos, phi) for n = 3.
  std::vector<std::vector<double>> integrand;  // per direction, J e^{-f} at step points
  std::vector<double> weights;
  const double dl = config.delta;
  auto jacobian_rays = [&](const std::vector<Eigen::VectorXd>& dirs) {
    // dirs[0] = center, then (+,-) pairs per parameter.
    std::vector<Ray> rays;
    for (const auto& d : dirs) rays.push_back(shoot(d));
    std::vector<double> vals(steps + 1, 0.0);
    for (int k = 1; k <= steps; ++k) {
      Eigen::MatrixXd m(n, n);
      m.col(0) = rays[0].vel[k].head(n);
      for (int a = 1; a < n; ++a) {
        m.col(a) = (rays[2 * a - 1].pos[k] - rays[2 * a].pos[k]).head(n) / (2 * dl);
      }
      const auto smp = interp.eval(rays[0].pos[k]);
      const double sq = std::sqrt(smp.g.topLeftCorner(n, n).determinant());
      vals[k] = sq * std::abs(m.determinant()) * std::exp(-smp.f);
    }
    return vals;
  };
  if (n == 2) {
    for (int a = 0; a < config.angles; ++a) {
      const double th = 2 * kPi * a / config.angles;
      auto dir = [](double t) { return Eigen::Vector2d(std::cos(t), std::sin(t)).eval(); };
      std::vector<Eigen::VectorXd> dirs{dir(th), dir(th + dl), dir(th - dl)};
      integrand.push_back(jacobian_rays(dirs));
      weights.push_back(2 * kPi / config.angles);
    }
  } else {
    const auto [nodes, wts] = gauss_legendre(config.polar);
    for (int b = 0; b < config.polar; ++b) {
      for (int a = 0; a < config.angles; ++a) {
        const double u = nodes[b];
        const double ph = 2 * kPi * a / config.angles;
        auto dir = [](double uu, double pp) {
          const double s = std::sqrt(std::max(0.0, 1 - uu * uu));
          return Eigen::Vector3d(s * std::cos(pp), s * std::sin(pp), uu).eval();
        };
        std::vector<Eigen::VectorXd> dirs{dir(u, ph), dir(u + dl, ph), dir(u - dl, ph), dir(u, ph + dl),
                                          dir(u, ph - dl)};
        integrand.push_back(jacobian_rays(dirs));
        weights.push_back(wts[b] * 2 * kPi / config.angles);
      }
    }
  }

  BallVolumes out;
  out.radii = radii;
  const double dt = r_max / steps;
  const double f0 = s0.f;
  for (double r : radii) {
    // Simpson on the step points up to r, with a cubic-interpolated last panel.
    auto radial = [&](const std::vector<double>& vals, int stride) {
      const double h = dt * stride;
      const int full = static_cast<int>(std::floor(r / h + 1e-9));
      const int even = full - (full % 2);
      double sum = 0;
      for (int k = 0; k + 2 <= even; k += 2) {
        sum += h / 3 * (vals[k * stride] + 4 * vals[(k + 1) * stride] + vals[(k + 2) * stride]);
      }
      double t0 = even * h;
      if (r - t0 > 1e-14 * r) {
        // Remaining piece [t0, r] by quadratic interpolation through three nodes.
        const int k0 = std::max(0, std::min(even, steps / stride - 2));
        const double a0 = vals[k0 * stride], a1 = vals[(k0 + 1) * stride], a2 = vals[(k0 + 2) * stride];
        auto q = [&](double t) {
          const double s = (t - k0 * h) / h;
          return a0 * (s - 1) * (s - 2) / 2 - a1 * s * (s - 2) + a2 * s * (s - 1) / 2;
        };
        const double mid = 0.5 * (t0 + r);
        sum += (r - t0) / 6 * (q(t0) + 4 * q(mid) + q(r));
      }
      return sum;
    };
    double v = 0, v_half = 0;
    for (std::size_t d = 0; d < integrand.size(); ++d) {
      v += weights[d] * radial(integrand[d], 1);
      v_half += weights[d] * radial(integrand[d], 2);
    }
    out.volumes.push_back(v);
    out.ratios.push_back(v / (std::exp(-f0) * euclidean_ball_volume(n, r)));
    out.richardson.push_back(std::abs(v - v_half) / 15);
  }
  return out;
}

double weighted_ball_volume(const ChartMetric& chart, int node, double r, const GeodesicConfig& config) {
  return weighted_ball_volumes(chart, node, {r}, config).volumes.front();
}

ExpansionReport volume_expansion_fit(const ChartMetric& chart, int node, double r_lo, double r_hi, bool quartic,
                                     const GeodesicConfig& config) {
  if (!(r_hi > r_lo) || !(r_lo > 0)) throw DomainError("volume_expansion_fit: need 0 < r_lo < r_hi");
  std::vector<double> radii;
  for (int j = 1; j <= 16; ++j) {
    const double r = r_hi * j / 16;
    if (r >= r_lo * (1 - 1e-12)) radii.push_back(r);
  }
  if (radii.size() < 3) throw DomainError("volume_expansion_fit: window too narrow");
  ExpansionReport rep;
  rep.volumes = weighted_ball_volumes(chart, node, radii, config);
  rep.fit = fit_fixed_intercept(rep.volumes.radii, rep.volumes.ratios, quartic);
  rep.deficit = -rep.fit.r2;
  const CurvatureFields cf = curvature_fields(chart);
  const int n = chart.n;
  rep.predicted = (cf.scalar(node) + 3 * cf.lap_f(node) - 3 * cf.grad_norm2(node)) / (6.0 * (n + 2));
  rep.relative_error = std::abs(rep.deficit - rep.predicted) / std::max(std::abs(rep.predicted), 1e-12);
  const double sc = cf.scalar(node);
  rep.predicted_r4 = (-3 * cf.riem_norm2(node) + 8 * cf.ric_norm2(node) + 5 * sc * sc) / (360.0 * (n + 2) * (n + 4));
  return rep;
}

}  // namespace scurv
