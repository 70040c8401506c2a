#include "scurv/spectral.hpp"

#include <cmath>
#include <random>

#include <Eigen/IterativeLinearSolvers>

#include "scurv/curvature.hpp"
#include "scurv/errors.hpp"

namespace scurv {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

int wrap(int i, int count) { return ((i % count) + count) % count; }

}  // namespace

double OperatorMatrix::symmetry_defect() const {
  const Eigen::SparseMatrix<double> k = weights.asDiagonal() * matrix;
  const Eigen::SparseMatrix<double> kt = k.transpose();
  const double scale = std::max(k.coeffs().cwiseAbs().maxCoeff(), 1e-300);
  const Eigen::SparseMatrix<double> d = k - kt;
  return d.nonZeros() == 0 ? 0.0 : d.coeffs().cwiseAbs().maxCoeff() / scale;
}

Eigen::SparseMatrix<double> OperatorMatrix::symmetrized() const {
  const Eigen::VectorXd s = weights.cwiseSqrt();
  Eigen::SparseMatrix<double> out = s.asDiagonal() * matrix * s.cwiseInverse().asDiagonal();
  // Remove rounding asymmetry.
  Eigen::SparseMatrix<double> t = out.transpose();
  out = 0.5 * (out + t);
  return out;
}

OperatorMatrix OperatorMatrix::plus_potential(const Eigen::VectorXd& potential, std::string new_label) const {
  if (potential.size() != size()) throw DomainError("plus_potential: size mismatch");
  OperatorMatrix out{matrix, weights, std::move(new_label)};
  Eigen::SparseMatrix<double> diag(size(), size());
  Triplets t;
  for (Eigen::Index i = 0; i < size(); ++i) t.emplace_back(i, i, potential(i));
  diag.setFromTriplets(t.begin(), t.end());
  out.matrix = out.matrix + diag;
  return out;
}

OperatorMatrix OperatorMatrix::negated(std::string new_label) const {
  return OperatorMatrix{-matrix, weights, std::move(new_label)};
}

OperatorMatrix weighted_laplacian_matrix(const ChartMetric& chart) {
  chart.validate();
  if (!chart.closed()) throw PreconditionError("weighted_laplacian_matrix: chart must be closed (all axes periodic)");
  const int n = chart.n;
  const auto N = static_cast<Eigen::Index>(chart.nodes());
  double cell = 1;
  for (int a = 0; a < n; ++a) cell *= chart.spacing[a];
  Eigen::VectorXd w(N);
  Triplets trip;
  const int combos = 1 << n;
  for (Eigen::Index p = 0; p < N; ++p) {
    const Eigen::MatrixXd g = chart.g[p].topLeftCorner(n, n);
    const Eigen::MatrixXd gi = g.inverse();
    const double wp = std::exp(-chart.f(p)) * std::sqrt(g.determinant()) * cell;
    w(p) = wp;
    const auto mi = chart.multi_index(static_cast<int>(p));
    // Energy term wp / 2^n sum_sigma (D^sigma u)^T gi (D^sigma u), where
    // D^sigma_a u = sigma_a (u(p + sigma_a e_a) - u(p)) / h_a.
    for (int s = 0; s < combos; ++s) {
      std::array<int, 3> nb{};
      std::array<double, 3> c{};
      for (int a = 0; a < n; ++a) {
        const int sign = (s >> a) & 1 ? 1 : -1;
        auto idx = mi;
        idx[a] = wrap(idx[a] + sign, chart.shape[a]);
        nb[a] = chart.index(idx[0], idx[1], idx[2]);
        c[a] = sign / chart.spacing[a];
      }
      // (D u)_a = c_a (u_{nb_a} - u_p); the form's Hessian gives K entries.
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          const double v = wp * gi(a, b) * c[a] * c[b] / combos;
          trip.emplace_back(nb[a], nb[b], v);
          trip.emplace_back(p, p, v);
          trip.emplace_back(nb[a], p, -v);
          trip.emplace_back(p, nb[b], -v);
        }
      }
    }
  }
  Eigen::SparseMatrix<double> k(N, N);
  k.setFromTriplets(trip.begin(), trip.end());
  OperatorMatrix op;
  op.weights = w;
  op.matrix = -(w.cwiseInverse().asDiagonal() * k);
  op.matrix.prune(0.0);
  op.label = "weighted_laplacian";
  return op;
}

EigenResult min_eigenvalue(const OperatorMatrix& op, const EigenConfig& config) {
  const Eigen::SparseMatrix<double> s = op.symmetrized();
  const Eigen::Index N = s.rows();
  if (N == 0) throw DomainError("min_eigenvalue: empty operator");
  // Gershgorin bounds for the spectrum.
  double lo = std::numeric_limits<double>::infinity(), norm = 0;
  for (Eigen::Index j = 0; j < N; ++j) {
    double diag = 0, off = 0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(s, j); it; ++it) {
      if (it.row() == j) {
        diag = it.value();
      } else {
        off += std::abs(it.value());
      }
    }
    lo = std::min(lo, diag - off);
    norm = std::max(norm, std::abs(diag) + off);
  }
  const double shift = lo - 1e-3 * std::max(1.0, norm);
  Eigen::SparseMatrix<double> shifted = s;
  for (Eigen::Index i = 0; i < N; ++i) shifted.coeffRef(i, i) -= shift;
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(config.cg_tolerance);
  cg.setMaxIterations(static_cast<int>(10 * N + 100));
  cg.compute(shifted);

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> uni(0.5, 1.5);
  Eigen::VectorXd y(N);
  for (Eigen::Index i = 0; i < N; ++i) y(i) = uni(rng);
  y.normalize();
  EigenResult res;
  res.operator_norm = norm;
  double lambda = y.dot(s * y), prev = lambda;
  double residual = 0;
  for (int it = 1; it <= config.max_iterations; ++it) {
    Eigen::VectorXd z = cg.solveWithGuess(y, y);
    z.normalize();
    y = z;
    const Eigen::VectorXd sy = s * y;
    lambda = y.dot(sy);
    residual = (sy - lambda * y).norm();
    res.iterations = it;
    const double scale = std::max(1.0, std::abs(lambda));
    // Eigenvalue error of the Rayleigh quotient is ~ residual^2 / gap.
    if (std::abs(lambda - prev) <= 1e-2 * config.tolerance * scale &&
        residual <= std::sqrt(config.tolerance) * 1e-2 * std::max(1.0, norm)) {
      break;
    }
    if (it == config.max_iterations) {
      throw NumericError("min_eigenvalue: no convergence after " + std::to_string(it) +
                         " iterations, residual " + std::to_string(residual));
    }
    prev = lambda;
  }
  res.lambda = lambda;
  res.rayleigh = lambda;
  res.residual = residual;
  res.vector = op.weights.cwiseSqrt().cwiseInverse().cwiseProduct(y);
  return res;
}

Eigen::VectorXd dense_spectrum(const OperatorMatrix& op) {
  const Eigen::MatrixXd s = Eigen::MatrixXd(op.symmetrized());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("dense_spectrum: eigensolver failed");
  return es.eigenvalues();
}

double dense_min_eigenvalue(const OperatorMatrix& op) { return dense_spectrum(op)(0); }

double conformal_coupling(int n) { return (n - 2) / (4.0 * (n - 1)); }

OperatorMatrix conformal_laplacian(const ChartMetric& chart, const std::optional<Eigen::VectorXd>& scalar) {
  if (chart.n < 3) throw PreconditionError("conformal_laplacian: n >= 3 required");
  // The conformal Laplacian is unweighted.
  ChartMetric plain = chart;
  plain.f.setZero();
  const OperatorMatrix lap = weighted_laplacian_matrix(plain);
  Eigen::VectorXd sc;
  if (scalar) {
    if (scalar->size() != static_cast<Eigen::Index>(chart.nodes())) {
      throw DomainError("conformal_laplacian: scalar field size mismatch");
    }
    sc = *scalar;
  } else {
    sc = curvature_fields(plain).scalar;
  }
  return lap.negated("").plus_potential(conformal_coupling(chart.n) * sc, "minus_conformal_laplacian");
}

ConformalSpectrum conformal_laplacian_min_eig(const ChartMetric& chart, const std::optional<Eigen::VectorXd>& scalar,
                                             const EigenConfig& config) {
  const OperatorMatrix op = conformal_laplacian(chart, scalar);
  ConformalSpectrum out;
  out.eig = min_eigenvalue(op, config);
  const double floor = 1e-8 * out.eig.operator_norm;
  out.inconclusive = std::abs(out.eig.lambda) <= floor;
  out.positive = out.eig.lambda > floor;
  return out;
}

PscReplay conformal_psc_replay(const ChartMetric& chart, double alpha, double beta, const Eigen::VectorXd& sc_ab,
                               const EigenConfig& config) {
  const int n = chart.n;
  if (n < 3) throw PreconditionError("conformal_psc_replay: n >= 3 required");
  if (sc_ab.size() != static_cast<Eigen::Index>(chart.nodes())) throw DomainError("conformal_psc_replay: size");
  const double k = conformal_coupling(n);
  PscReplay out;
  out.alpha = alpha;
  out.beta = beta;
  out.beta_threshold = k * alpha * alpha;
  const CurvatureFields cf = curvature_fields(chart);
  const Eigen::VectorXd sc = sc_ab - alpha * cf.lap_f + beta * cf.grad_norm2;
  out.min_sc_ab = sc_ab.minCoeff();
  out.min_sc = sc.minCoeff();
  out.pointwise_bound = (k * (sc_ab + (beta - out.beta_threshold) * cf.grad_norm2)).minCoeff();
  out.spectrum = conformal_laplacian_min_eig(chart, sc, config);
  return out;
}

}  // namespace scurv
