#include "scurv/hypersurface.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include <unsupported/Eigen/FFT>

#include "scurv/curvature.hpp"
#include "scurv/errors.hpp"
#include "scurv/geodesic.hpp"

namespace scurv {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

// Spectral derivative of a 2 pi periodic sample.
std::vector<double> periodic_derivative(const std::vector<double>& v) {
  const int N = static_cast<int>(v.size());
  if (N < 3) return std::vector<double>(v.size(), 0.0);
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, v);
  for (int k = 0; k < N; ++k) {
    const int m = k <= N / 2 ? k : k - N;
    if (N % 2 == 0 && k == N / 2) {
      spec[k] = 0;
    } else {
      spec[k] *= std::complex<double>(0, m);
    }
  }
  std::vector<double> out;
  fft.inv(out, spec);
  return out;
}

// Node layout of the parameter grid: last parameter fastest.
struct Grid {
  int dim;
  std::array<int, 2> counts;
  int size() const { return counts[0] * counts[1]; }
  int node(int i, int j) const { return i * counts[1] + j; }
};

// Derivative along parameter axis `axis` of a nodal scalar. A coordinate on a
// periodic chart axis may wind around it; the winding is removed before the
// spectral derivative and added back as a constant slope.
std::vector<double> diff_axis(const Grid& grid, const std::vector<double>& v, int axis, double period = 0) {
  std::vector<double> out(v.size());
  const int m = grid.counts[axis];
  const int other = grid.counts[1 - axis];
  std::vector<double> line(m);
  for (int o = 0; o < other; ++o) {
    for (int t = 0; t < m; ++t) line[t] = v[axis == 0 ? grid.node(t, o) : grid.node(o, t)];
    double slope = 0;
    if (period > 0) {
      auto step = [&](double a, double b) { return (b - a) - period * std::round((b - a) / period); };
      for (int t = 1; t < m; ++t) line[t] = line[t - 1] + step(line[t - 1], line[t]);
      const double total = line[m - 1] + step(line[m - 1], line[0]) - line[0];
      slope = std::round(total / period) * period / kTwoPi;
      for (int t = 0; t < m; ++t) line[t] -= slope * kTwoPi * t / m;
    }
    const auto d = periodic_derivative(line);
    for (int t = 0; t < m; ++t) out[axis == 0 ? grid.node(t, o) : grid.node(o, t)] = d[t] + slope;
  }
  return out;
}

// Christoffel symbols Gamma^l_ij(a, b) contracted with two vectors.
Eigen::Vector3d christoffel_contract(const ChartInterpolant::Sample& smp, const Eigen::Matrix3d& ginv, int n,
                                     const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  Eigen::Vector3d low = Eigen::Vector3d::Zero();
  for (int m = 0; m < n; ++m) {
    double s = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        s += 0.5 * (smp.dg[i](m, j) + smp.dg[j](m, i) - smp.dg[m](i, j)) * a(i) * b(j);
      }
    }
    low(m) = s;
  }
  Eigen::Vector3d out = Eigen::Vector3d::Zero();
  out.head(n) = ginv.topLeftCorner(n, n) * low.head(n);
  return out;
}

}  // namespace

double DiscreteHypersurface::normal_defect() const {
  double worst = 0;
  const ChartInterpolant interp(*ambient);
  for (std::size_t p = 0; p < nodes(); ++p) {
    const auto smp = interp.eval(position[p]);
    const int n = ambient->n;
    const double len = std::sqrt(normal[p].head(n).dot(smp.g.topLeftCorner(n, n) * normal[p].head(n)));
    worst = std::max(worst, std::abs(len - 1));
  }
  return worst;
}

DiscreteHypersurface make_hypersurface(std::shared_ptr<const ChartMetric> ambient, std::array<int, 2> counts,
                                       const ParamFn& param, int orientation, std::string kind) {
  if (!ambient) throw DomainError("make_hypersurface: no ambient chart");
  const int n = ambient->n;
  if (n != 2 && n != 3) throw DomainError("make_hypersurface: ambient dimension must be 2 or 3");
  const int dim = n - 1;
  if (dim == 1) counts[1] = 1;
  for (int a = 0; a < dim; ++a) {
    if (counts[a] < 8) throw DomainError("make_hypersurface: at least 8 nodes per parameter");
  }
  if (orientation != 1 && orientation != -1) throw DomainError("make_hypersurface: orientation must be +-1");
  const Grid grid{dim, counts};
  const int N = grid.size();

  DiscreteHypersurface s;
  s.ambient = ambient;
  s.dim = dim;
  s.counts = counts;
  s.kind = std::move(kind);
  s.position.resize(N);
  for (int i = 0; i < counts[0]; ++i) {
    for (int j = 0; j < counts[1]; ++j) {
      const Eigen::Vector2d u(kTwoPi * i / counts[0], dim == 2 ? kTwoPi * j / counts[1] : 0.0);
      s.position[grid.node(i, j)] = param(u);
    }
  }
  // Spectral first and second derivatives of each coordinate.
  std::array<std::array<std::vector<double>, 2>, 3> d1;
  std::array<std::array<std::array<std::vector<double>, 2>, 2>, 3> d2;
  for (int c = 0; c < n; ++c) {
    std::vector<double> xc(N);
    for (int p = 0; p < N; ++p) xc[p] = s.position[p](c);
    const double period = ambient->periodic[c] ? ambient->shape[c] * ambient->spacing[c] : 0.0;
    for (int a = 0; a < dim; ++a) d1[c][a] = diff_axis(grid, xc, a, period);
    for (int a = 0; a < dim; ++a) {
      for (int b = 0; b < dim; ++b) d2[c][a][b] = diff_axis(grid, d1[c][a], b);
    }
  }

  const ChartInterpolant interp(*ambient);
  const CurvatureFields cf = curvature_fields(*ambient);
  s.tangent.resize(N);
  s.normal.resize(N);
  s.induced.resize(N);
  s.second_fundamental.resize(N);
  s.mean_curvature.resize(N);
  s.a_norm2.resize(N);
  s.f.resize(N);
  s.normal_derivative_f.resize(N);
  s.ric_f_normal.resize(N);
  for (int p = 0; p < N; ++p) {
    const Eigen::Vector3d& x = s.position[p];
    if (!interp.inside(x)) throw DomainError("make_hypersurface: node " + std::to_string(p) + " outside the chart");
    const auto smp = interp.eval(x);
    const Eigen::Matrix3d g = smp.g;
    Eigen::Matrix3d ginv = Eigen::Matrix3d::Zero();
    ginv.topLeftCorner(n, n) = g.topLeftCorner(n, n).inverse();

    std::array<Eigen::Vector3d, 2> t{Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero()};
    for (int a = 0; a < dim; ++a) {
      for (int c = 0; c < n; ++c) t[a](c) = d1[c][a][p];
    }
    Eigen::Vector3d eta = Eigen::Vector3d::Zero();
    if (dim == 1) {
      eta << t[0](1), -t[0](0), 0;
    } else {
      eta = t[0].cross(t[1]);
    }
    const double norm2 = eta.dot(ginv * eta);
    if (!(norm2 > 1e-24)) throw DomainError("make_hypersurface: degenerate normal at node " + std::to_string(p));
    const Eigen::Vector3d nu = orientation * (ginv * eta) / std::sqrt(norm2);

    Eigen::Matrix2d gbar = Eigen::Matrix2d::Identity();
    Eigen::Matrix2d A = Eigen::Matrix2d::Zero();
    for (int a = 0; a < dim; ++a) {
      for (int b = 0; b < dim; ++b) {
        gbar(a, b) = t[a].dot(g * t[b]);
        Eigen::Vector3d xab = Eigen::Vector3d::Zero();
        for (int c = 0; c < n; ++c) xab(c) = d2[c][a][b][p];
        const Eigen::Vector3d cov = xab + christoffel_contract(smp, ginv, n, t[a], t[b]);
        A(a, b) = -nu.dot(g * cov);
      }
    }
    A = 0.5 * (A + A.transpose()).eval();
    const Eigen::Matrix2d shape = gbar.topLeftCorner(dim, dim).inverse() * A.topLeftCorner(dim, dim);
    Eigen::Matrix2d shape_full = Eigen::Matrix2d::Zero();
    shape_full.topLeftCorner(dim, dim) = shape.topLeftCorner(dim, dim);

    const auto [fv, df] = interp.density(x);
    s.tangent[p] = t;
    s.normal[p] = nu;
    s.induced[p] = gbar;
    s.second_fundamental[p] = A;
    s.mean_curvature(p) = shape_full.trace();
    s.a_norm2(p) = (shape_full * shape_full).trace();
    s.f(p) = fv;
    s.normal_derivative_f(p) = df.head(n).dot(nu.head(n));
    const Eigen::Matrix3d ric_f = interp.field(cf.ric_f, x);
    s.ric_f_normal(p) = nu.head(n).dot(ric_f.topLeftCorner(n, n) * nu.head(n));
  }
  return s;
}

DiscreteHypersurface circle_hypersurface(std::shared_ptr<const ChartMetric> ambient, Eigen::Vector2d center,
                                         double radius, int count, double phase) {
  if (!(radius > 0)) throw DomainError("circle_hypersurface: radius must be positive");
  return make_hypersurface(
      std::move(ambient), {count, 1},
      [=](const Eigen::Vector2d& u) {
        return Eigen::Vector3d(center(0) + radius * std::cos(u(0) + phase), center(1) + radius * std::sin(u(0) + phase),
                               0);
      },
      1, "circle");
}

DiscreteHypersurface latitude_hypersurface(std::shared_ptr<const ChartMetric> ambient, double theta0, int count,
                                           double phase) {
  return make_hypersurface(
      std::move(ambient), {count, 1},
      [=](const Eigen::Vector2d& u) { return Eigen::Vector3d(theta0, u(0) + phase, 0); }, 1,
      "latitude");
}

DiscreteHypersurface torus_of_revolution(std::shared_ptr<const ChartMetric> ambient, Eigen::Vector3d center,
                                         double major, double minor, std::array<int, 2> counts) {
  if (!(major > minor && minor > 0)) throw DomainError("torus_of_revolution: need major > minor > 0");
  return make_hypersurface(
      std::move(ambient), counts,
      [=](const Eigen::Vector2d& u) {
        const double rho = major + minor * std::cos(u(1));
        return Eigen::Vector3d(center(0) + rho * std::cos(u(0)), center(1) + rho * std::sin(u(0)),
                               center(2) + minor * std::sin(u(1)));
      },
      1, "revolution");
}

Eigen::VectorXd weighted_mean_curvature(const DiscreteHypersurface& s) {
  return s.mean_curvature - s.normal_derivative_f;
}

double f_minimal_residual(const DiscreteHypersurface& s) {
  return weighted_mean_curvature(s).cwiseAbs().maxCoeff();
}

double gaussian_sphere_hf(int n, double r) { return (n - 1) / r - r / 2; }

double bisect_root(const std::function<double(double)>& fn, double lo, double hi, double tol) {
  double flo = fn(lo), fhi = fn(hi);
  if (flo == 0) return lo;
  if (fhi == 0) return hi;
  if ((flo > 0) == (fhi > 0)) throw NumericError("bisect_root: no sign change on the bracket");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double fm = fn(mid);
    if (fm == 0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double shrinker_radius(int n) {
  if (n < 2) throw DomainError("shrinker_radius: n >= 2 required");
  return bisect_root([n](double r) { return gaussian_sphere_hf(n, r); }, 1e-6, 10.0);
}

ChartMetric induced_chart(const DiscreteHypersurface& s) {
  ChartMetric c;
  c.n = s.dim;
  c.shape = {s.counts[0], s.dim == 2 ? s.counts[1] : 1, 1};
  c.spacing = {kTwoPi / s.counts[0], s.dim == 2 ? kTwoPi / s.counts[1] : 1.0, 1};
  c.origin = {0, 0, 0};
  c.periodic = {true, s.dim == 2, false};
  c.g.resize(s.nodes());
  for (std::size_t p = 0; p < s.nodes(); ++p) {
    c.g[p] = Eigen::Matrix3d::Identity();
    c.g[p].topLeftCorner(s.dim, s.dim) = s.induced[p].topLeftCorner(s.dim, s.dim);
  }
  c.f = s.f;
  c.provenance = "induced:" + s.kind;
  return c;
}

OperatorMatrix stability_operator(const DiscreteHypersurface& s) {
  const OperatorMatrix lap = weighted_laplacian_matrix(induced_chart(s));
  return lap.plus_potential(s.a_norm2 + s.ric_f_normal, "stability_operator");
}

StabilityIndex lf_stability_index(const DiscreteHypersurface& s, double kernel_band) {
  StabilityIndex out;
  const OperatorMatrix minus_l = stability_operator(s).negated("minus_stability_operator");
  out.spectrum = dense_spectrum(minus_l);
  if (kernel_band < 0) {
    double hs = 0;
    for (std::size_t p = 0; p < s.nodes(); ++p) {
      for (int a = 0; a < s.dim; ++a) hs = std::max(hs, std::sqrt(s.induced[p](a, a)) * kTwoPi / s.counts[a]);
    }
    double hc = 0;
    for (int a = 0; a < s.ambient->n; ++a) hc = std::max(hc, s.ambient->spacing[a]);
    const double pot = (s.a_norm2 + s.ric_f_normal).cwiseAbs().maxCoeff();
    kernel_band = std::max(1e-8, (hs * hs + hc * hc) * (1 + pot));
  }
  out.kernel_band = kernel_band;
  for (Eigen::Index i = 0; i < out.spectrum.size(); ++i) {
    const double e = out.spectrum(i);
    if (e < -1e-8) ++out.strict_index;
    if (e < -kernel_band) {
      ++out.index;
    } else if (e <= kernel_band) {
      ++out.near_kernel;
    }
  }
  return out;
}

ConformalMinimalReport conformal_minimal_check(const std::shared_ptr<const ChartMetric>& ambient,
                                               std::array<int, 2> counts, const ParamFn& param, int orientation) {
  const int n = ambient->n;
  auto tilde = std::make_shared<ChartMetric>(*ambient);
  for (std::size_t p = 0; p < tilde->nodes(); ++p) {
    tilde->g[p].topLeftCorner(n, n) *= std::exp(-2 * ambient->f(p) / (n - 1));
  }
  tilde->f.setZero();
  tilde->provenance = "conformal:" + ambient->provenance;
  const DiscreteHypersurface s = make_hypersurface(ambient, counts, param, orientation, "weighted");
  const DiscreteHypersurface st = make_hypersurface(tilde, counts, param, orientation, "conformal");
  const Eigen::VectorXd hf = weighted_mean_curvature(s);
  ConformalMinimalReport out;
  out.hf_max = hf.cwiseAbs().maxCoeff();
  out.h_tilde_max = st.mean_curvature.cwiseAbs().maxCoeff();
  for (std::size_t p = 0; p < s.nodes(); ++p) {
    const double predicted = std::exp(s.f(p) / (n - 1)) * hf(p);
    out.residual = std::max(out.residual, std::abs(st.mean_curvature(p) - predicted));
  }
  return out;
}

}  // namespace scurv
