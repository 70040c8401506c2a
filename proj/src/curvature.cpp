#include "scurv/curvature.hpp"

#include <cmath>
#include <numbers>

#include "scurv/errors.hpp"

namespace scurv {

namespace {

// Neighbor of `node` at offset s along `axis`, wrapping periodic axes.
// Returns -1 outside an open axis.
int shifted(const ChartMetric& c, int node, int axis, int s) {
  auto m = c.multi_index(node);
  int i = m[axis] + s;
  if (c.periodic[axis]) {
    i = ((i % c.shape[axis]) + c.shape[axis]) % c.shape[axis];
  } else if (i < 0 || i >= c.shape[axis]) {
    return -1;
  }
  m[axis] = i;
  return c.index(m[0], m[1], m[2]);
}

// First derivative along an axis: central where possible, one-sided second
// order at open boundaries.
template <typename T, typename Get>
T d1(const ChartMetric& c, int node, int axis, const Get& get) {
  const double h = c.spacing[axis];
  const int p = shifted(c, node, axis, 1);
  const int m = shifted(c, node, axis, -1);
  if (p >= 0 && m >= 0) return T((get(p) - get(m)) / (2 * h));
  if (p >= 0) return T((-3.0 * get(node) + 4.0 * get(p) - get(shifted(c, node, axis, 2))) / (2 * h));
  return T((3.0 * get(node) - 4.0 * get(m) + get(shifted(c, node, axis, -2))) / (2 * h));
}

bool interior(const ChartMetric& c, int node, int margin) {
  const auto m = c.multi_index(node);
  for (int a = 0; a < c.n; ++a) {
    if (c.periodic[a]) continue;
    if (m[a] < margin || m[a] >= c.shape[a] - margin) return false;
  }
  return true;
}

ResidualReport compare(const ChartMetric& c, const Eigen::VectorXd& lhs, const Eigen::VectorXd& rhs, int margin) {
  ResidualReport rep;
  for (Eigen::Index p = 0; p < lhs.size(); ++p) {
    if (!interior(c, static_cast<int>(p), margin)) continue;
    rep.max_abs = std::max(rep.max_abs, std::abs(lhs(p) - rhs(p)));
    rep.rhs_scale = std::max(rep.rhs_scale, std::abs(rhs(p)));
  }
  rep.residual = rep.max_abs / (1 + rep.rhs_scale);
  return rep;
}

}  // namespace

CurvatureFields curvature_fields(const ChartMetric& c) {
  c.validate();
  const int n = c.n;
  for (int a = 0; a < n; ++a) {
    if (c.shape[a] < 8) throw PreconditionError("curvature_fields: need at least 8 nodes per axis");
  }
  const int total = static_cast<int>(c.nodes());
  CurvatureFields cf;
  cf.n = n;
  cf.christoffel.resize(total);
  cf.ginv.resize(total);
  cf.ricci.resize(total);
  cf.hess_f.resize(total);
  cf.ric_f.resize(total);
  cf.grad_f.resize(total);
  cf.sqrt_det.resize(total);
  cf.scalar.resize(total);
  cf.riem_norm2.resize(total);
  cf.ric_norm2.resize(total);
  cf.lap_f.resize(total);
  cf.grad_norm2.resize(total);

  auto metric = [&](int q) -> const Eigen::Matrix3d& { return c.g[q]; };
  for (int p = 0; p < total; ++p) {
    Eigen::Matrix3d gi = Eigen::Matrix3d::Zero();
    gi.topLeftCorner(n, n) = c.g[p].topLeftCorner(n, n).inverse();
    cf.ginv[p] = gi;
    cf.sqrt_det(p) = std::sqrt(c.g[p].topLeftCorner(n, n).determinant());
    std::array<Eigen::Matrix3d, 3> dg;
    for (int a = 0; a < 3; ++a) dg[a] = a < n ? d1<Eigen::Matrix3d>(c, p, a, metric) : Eigen::Matrix3d::Zero();
    Christoffel gam = Christoffel::Zero();
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          double s = 0;
          for (int l = 0; l < n; ++l) s += gi(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
          gam(k * 9 + i * 3 + j) = gam(k * 9 + j * 3 + i) = 0.5 * s;
        }
    cf.christoffel[p] = gam;
  }

  auto gamma_field = [&](int q) -> const Christoffel& { return cf.christoffel[q]; };
  for (int p = 0; p < total; ++p) {
    const Christoffel& gam = cf.christoffel[p];
    const Eigen::Matrix3d& gi = cf.ginv[p];
    const Eigen::Matrix3d& g = c.g[p];
    // Differentiating the Christoffel field keeps the curvature in divergence
    // form, so its integrals telescope on closed charts.
    std::array<Christoffel, 3> dgam;
    for (int a = 0; a < 3; ++a) dgam[a] = a < n ? d1<Christoffel>(c, p, a, gamma_field) : Christoffel::Zero();
    // R^l_{ijk} = d_j G^l_ik - d_k G^l_ij + G^l_jm G^m_ik - G^l_km G^m_ij
    double riem[3][3][3][3] = {};
    for (int l = 0; l < n; ++l)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) {
            double v = dgam[j](l * 9 + i * 3 + k) - dgam[k](l * 9 + i * 3 + j);
            for (int m = 0; m < n; ++m) {
              v += gamma_at(gam, l, j, m) * gamma_at(gam, m, i, k) - gamma_at(gam, l, k, m) * gamma_at(gam, m, i, j);
            }
            riem[l][i][j][k] = v;
          }
    Eigen::Matrix3d ric = Eigen::Matrix3d::Zero();
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) ric(i, k) += riem[j][i][j][k];
    ric = 0.5 * (ric + ric.transpose()).eval();
    cf.ricci[p] = ric;
    cf.scalar(p) = (gi.cwiseProduct(ric)).sum();
    cf.ric_norm2(p) = (gi * ric * gi * ric).trace();

    // |Rie|^2 = R_{abcd} R^{abcd}: lower the first index, then raise the rest.
    double low[3][3][3][3] = {};
    for (int a = 0; a < n; ++a)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k)
            for (int m = 0; m < n; ++m) low[a][i][j][k] += g(a, m) * riem[m][i][j][k];
    double norm = 0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int cc = 0; cc < n; ++cc)
          for (int d = 0; d < n; ++d) {
            double up = 0;
            for (int a2 = 0; a2 < n; ++a2)
              for (int b2 = 0; b2 < n; ++b2)
                for (int c2 = 0; c2 < n; ++c2)
                  for (int d2i = 0; d2i < n; ++d2i)
                    up += gi(a, a2) * gi(b, b2) * gi(cc, c2) * gi(d, d2i) * low[a2][b2][c2][d2i];
            norm += low[a][b][cc][d] * up;
          }
    cf.riem_norm2(p) = norm;

    // Density derivatives.
    Eigen::Vector3d df = Eigen::Vector3d::Zero();
    auto fval = [&](int q) { return c.f(q); };
    for (int a = 0; a < n; ++a) df(a) = d1<double>(c, p, a, fval);
    cf.grad_f[p] = df;
    Eigen::Matrix3d hess = Eigen::Matrix3d::Zero();
    // The Hessian uses the same nested central difference as the curvature,
    // so linearized identities between the two hold without stencil mismatch.
    for (int a = 0; a < n; ++a) {
      auto dfa = [&](int q) { return d1<double>(c, q, a, fval); };
      hess(a, a) = d1<double>(c, p, a, dfa);
      for (int b = a + 1; b < n; ++b) {
        auto dfb = [&](int q) { return d1<double>(c, q, b, fval); };
        hess(a, b) = hess(b, a) = d1<double>(c, p, a, dfb);
      }
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) hess(i, j) -= gamma_at(gam, k, i, j) * df(k);
    cf.hess_f[p] = hess;
    cf.lap_f(p) = (gi.cwiseProduct(hess)).sum();
    cf.grad_norm2(p) = df.dot(gi * df);
    cf.ric_f[p] = ric + hess;
  }
  return cf;
}

Eigen::VectorXd weighted_scalar_curvature(const CurvatureFields& fields, double alpha, double beta) {
  return fields.scalar + alpha * fields.lap_f - beta * fields.grad_norm2;
}

Eigen::VectorXd weighted_scalar_curvature(const ChartMetric& chart, double alpha, double beta) {
  return weighted_scalar_curvature(curvature_fields(chart), alpha, beta);
}

WeightPair case_pair(int m) {
  if (m < 1) throw DomainError("case_pair: m must be >= 1");
  return {2.0, (m + 1.0) / m};
}

ChartMetric conformal_change(const ChartMetric& chart, const Eigen::VectorXd& w) {
  if (static_cast<std::size_t>(w.size()) != chart.nodes()) throw DomainError("conformal_change: field size");
  ChartMetric out = chart;
  for (std::size_t p = 0; p < chart.nodes(); ++p) {
    const double s = std::exp(2 * w(static_cast<Eigen::Index>(p)));
    out.g[p].topLeftCorner(chart.n, chart.n) *= s;
  }
  out.f = chart.f + chart.n * w;
  out.provenance = chart.provenance + "+conformal";
  return out;
}

ResidualReport cgy_invariance_residual(const ChartMetric& chart, const Eigen::VectorXd& w, int margin) {
  if (chart.n < 2) throw DomainError("cgy_invariance_residual: n >= 2 required");
  const WeightPair pair = cgy_pair(chart.n);
  const Eigen::VectorXd lhs = weighted_scalar_curvature(conformal_change(chart, w), pair.alpha, pair.beta);
  const Eigen::VectorXd base = weighted_scalar_curvature(chart, pair.alpha, pair.beta);
  const Eigen::VectorXd rhs = (-2 * w.array()).exp() * base.array();
  return compare(chart, lhs, rhs, margin);
}

ConformalDensityReport conformal_metric_from_density(const ChartMetric& chart, int margin) {
  const int n = chart.n;
  if (n < 2) throw DomainError("conformal_metric_from_density: n >= 2 required");
  ConformalDensityReport rep;
  rep.tilde = chart;
  for (std::size_t p = 0; p < chart.nodes(); ++p) {
    rep.tilde.g[p].topLeftCorner(n, n) *= std::exp(-2 * chart.f(static_cast<Eigen::Index>(p)) / (n - 1));
  }
  rep.tilde.f.setZero();
  rep.tilde.provenance = chart.provenance + "+density_conformal";
  const CurvatureFields base = curvature_fields(chart);
  const CurvatureFields tilde = curvature_fields(rep.tilde);
  const Eigen::ArrayXd bracket =
      base.scalar.array() + 2 * base.lap_f.array() - (n - 2.0) / (n - 1.0) * base.grad_norm2.array();
  const Eigen::VectorXd stated = ((chart.f.array() / (n - 1)).exp() * bracket).matrix();
  const Eigen::VectorXd corrected = ((2 * chart.f.array() / (n - 1)).exp() * bracket).matrix();
  rep.stated = compare(chart, tilde.scalar, stated, margin);
  rep.corrected = compare(chart, tilde.scalar, corrected, margin);
  return rep;
}

double integrate(const ChartMetric& c, const CurvatureFields& fields, const Eigen::VectorXd& values,
                 const Eigen::VectorXd* weight) {
  double sum = 0;
  double cell = 1;
  for (int a = 0; a < c.n; ++a) cell *= c.spacing[a];
  for (int p = 0; p < static_cast<int>(c.nodes()); ++p) {
    const auto m = c.multi_index(p);
    double w = cell * fields.sqrt_det(p);
    for (int a = 0; a < c.n; ++a) {
      if (!c.periodic[a] && (m[a] == 0 || m[a] == c.shape[a] - 1)) w *= 0.5;
    }
    if (weight) w *= (*weight)(p);
    sum += w * values(p);
  }
  return sum;
}

GaussBonnetReport gauss_bonnet_weighted_check(const Atlas& atlas, double alpha, double beta) {
  if (atlas.charts.empty()) throw PreconditionError("gauss_bonnet_weighted_check: empty atlas");
  GaussBonnetReport rep;
  for (const auto& ac : atlas.charts) {
    if (ac.chart.n != 2) throw PreconditionError("gauss_bonnet_weighted_check: surfaces only");
    if (static_cast<std::size_t>(ac.weight.size()) != ac.chart.nodes()) {
      throw PreconditionError("gauss_bonnet_weighted_check: partition weights do not match the chart");
    }
    if (atlas.charts.size() == 1 && !ac.chart.closed()) {
      throw PreconditionError("gauss_bonnet_weighted_check: open chart without a closing atlas");
    }
    const CurvatureFields cf = curvature_fields(ac.chart);
    rep.integral += integrate(ac.chart, cf, weighted_scalar_curvature(cf, alpha, beta), &ac.weight);
    rep.grad_integral += integrate(ac.chart, cf, cf.grad_norm2, &ac.weight);
    rep.laplacian_integral += integrate(ac.chart, cf, cf.lap_f, &ac.weight);
  }
  rep.rhs = 4 * std::numbers::pi * atlas.euler_characteristic - beta * rep.grad_integral;
  rep.residual = std::abs(rep.integral - rep.rhs) / (1 + std::abs(rep.rhs));
  return rep;
}

double torus_obstruction_scan(const ChartMetric& chart, double alpha, double beta) {
  if (!chart.closed()) throw PreconditionError("torus_obstruction_scan: chart must be a torus");
  if (beta < 0) throw DomainError("torus_obstruction_scan: beta must be nonnegative");
  for (const auto& g : chart.g) {
    if (!g.topLeftCorner(chart.n, chart.n).isApprox(chart.g.front().topLeftCorner(chart.n, chart.n), 0)) {
      throw PreconditionError("torus_obstruction_scan: metric must be flat (constant coefficients)");
    }
  }
  return weighted_scalar_curvature(chart, alpha, beta).minCoeff();
}

}  // namespace scurv
