#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "scurv/curvature.hpp"
#include "scurv/errors.hpp"
#include "scurv/spectral.hpp"

using namespace scurv;

namespace {

constexpr double kTwoPi = 2 * oracle::pi;

Eigen::Matrix3d flat(const Eigen::Vector3d&) { return Eigen::Matrix3d::Identity(); }

ChartMetric circle_chart(int count, const ScalarFn& f) {
  return make_chart(1, {count, 1, 1}, {0, 0, 0}, {kTwoPi / count, 1, 1}, {true, false, false}, flat, f, "circle");
}

double weighted_dot(const OperatorMatrix& op, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  return (op.weights.array() * u.array() * v.array()).sum();
}

Eigen::VectorXd random_field(Eigen::Index n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

}  // namespace

TEST_SUITE("spectral") {
  TEST_CASE("weighted Laplacian basics") {
    const auto c = circle_chart(64, [](const Eigen::Vector3d& x) { return std::sin(x(0)); });
    const auto lap = weighted_laplacian_matrix(c);
    CHECK(lap.symmetry_defect() <= 1e-12);
    CHECK((lap.matrix * Eigen::VectorXd::Ones(64)).cwiseAbs().maxCoeff() <= 1e-14 * Eigen::MatrixXd(lap.matrix).cwiseAbs().maxCoeff());
    for (unsigned s = 1; s <= 10; ++s) {
      const Eigen::VectorXd u = random_field(64, s), v = random_field(64, 100 + s);
      CHECK(weighted_dot(lap, lap.matrix * u, v) == doctest::Approx(weighted_dot(lap, u, lap.matrix * v)).epsilon(1e-8).scale(1));
    }
    // Weights are e^{-f} times the cell length.
    for (int i = 0; i < 64; ++i) CHECK(lap.weights(i) == doctest::Approx(std::exp(-c.f(i)) * kTwoPi / 64).epsilon(1e-13));

    const auto t = flat_torus_chart(3, 8, kTwoPi, band_limited_function(3, 1, 0.4, kTwoPi, 2));
    const auto lt = weighted_laplacian_matrix(t);
    CHECK(lt.symmetry_defect() <= 1e-12);
    CHECK((lt.matrix * Eigen::VectorXd::Ones(static_cast<Eigen::Index>(t.nodes()))).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK_THROWS_AS(weighted_laplacian_matrix(spherical_band(17, 32, 0.5, 2.5)), PreconditionError);
  }

  TEST_CASE("zero density gives the plain Laplacian") {
    const auto t = flat_torus_chart(2, 8, kTwoPi);
    const Eigen::VectorXd spec = dense_spectrum(weighted_laplacian_matrix(t).negated("-lap"));
    std::vector<double> symbol;
    const double h = kTwoPi / 8;
    for (int a = 0; a < 8; ++a)
      for (int b = 0; b < 8; ++b) symbol.push_back((4 - 2 * std::cos(a * h) - 2 * std::cos(b * h)) / (h * h));
    std::sort(symbol.begin(), symbol.end());
    for (int i = 0; i < 64; ++i) CHECK(spec(i) == doctest::Approx(symbol[i]).epsilon(1e-12).scale(1));

    // Second-order consistency on a smooth field.
    const auto fine = flat_torus_chart(2, 64, kTwoPi);
    const auto u = sample_field(fine, [](const Eigen::Vector3d& x) { return std::sin(x(0)) * std::cos(2 * x(1)); });
    const Eigen::VectorXd lu = weighted_laplacian_matrix(fine).matrix * u;
    CHECK((lu + 5 * u).cwiseAbs().maxCoeff() <= 5 * std::pow(kTwoPi / 64, 2));
  }

  TEST_CASE("flat 3-torus: constant mode and constant potential") {
    const auto c = flat_torus_chart(3, 12, kTwoPi);
    const auto flat_eig = conformal_laplacian_min_eig(c);
    CHECK(std::abs(flat_eig.eig.lambda) <= 1e-8);
    CHECK_FALSE(flat_eig.positive);
    CHECK(flat_eig.inconclusive);

    for (double value : {0.7, 2.0, 0.05}) {
      const auto r = conformal_laplacian_min_eig(c, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(c.nodes()), value));
      CHECK(std::abs(r.eig.lambda - value / 8) <= 1e-8);
      CHECK(r.positive);
    }
    CHECK(conformal_coupling(3) == 0.125);
    CHECK(conformal_coupling(4) == doctest::Approx(1.0 / 6));
  }

  TEST_CASE("inverse iteration agrees with the dense solver") {
    const auto c = flat_torus_chart(3, 12, kTwoPi, [](const Eigen::Vector3d& x) { return 0.3 * std::sin(x(0)) * std::cos(x(1)); });
    for (unsigned s : {1u, 2u, 3u}) {
      const Eigen::VectorXd pot = random_field(static_cast<Eigen::Index>(c.nodes()), s);
      const auto op = conformal_laplacian(c, pot);
      const auto r = conformal_laplacian_min_eig(c, pot);
      CHECK(std::abs(r.eig.lambda - dense_min_eigenvalue(op)) <= 1e-8);
      CHECK(r.eig.rayleigh == doctest::Approx(r.eig.lambda).epsilon(1e-8));
      CHECK(r.eig.residual <= 1e-7 * r.eig.operator_norm);
    }
  }

  TEST_CASE("eigenvalue grows with the potential") {
    const auto c = flat_torus_chart(3, 8, kTwoPi);
    const auto n = static_cast<Eigen::Index>(c.nodes());
    for (unsigned s = 1; s <= 5; ++s) {
      const Eigen::VectorXd base = random_field(n, s);
      const Eigen::VectorXd bump = random_field(n, 50 + s).cwiseAbs();
      const double lo = conformal_laplacian_min_eig(c, base).eig.lambda;
      const double hi = conformal_laplacian_min_eig(c, base + bump).eig.lambda;
      CHECK(hi >= lo - 1e-10);
      CHECK(hi <= lo + bump.maxCoeff() / 8 + 1e-10);
    }
  }

  TEST_CASE("iteration cap is a numeric error") {
    const auto c = flat_torus_chart(3, 8, kTwoPi);
    EigenConfig cfg;
    cfg.max_iterations = 1;
    cfg.tolerance = 1e-15;
    CHECK_THROWS_AS(min_eigenvalue(conformal_laplacian(c, random_field(512, 4)), cfg), NumericError);
  }

  TEST_CASE("conformal to positive scalar curvature replay") {
    const auto c = flat_torus_chart(3, 12, kTwoPi, [](const Eigen::Vector3d& x) { return 0.3 * std::sin(x(0)) * std::sin(x(1)); });
    const Eigen::VectorXd sc_ab = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(c.nodes()), 0.5);
    for (auto [a, b] : {std::pair{2.0, 1.0}, {2.0, 0.5}, {3.0, 3.0}, {1.0, 0.2}}) {
      CAPTURE(a);
      CAPTURE(b);
      const auto r = conformal_psc_replay(c, a, b, sc_ab);
      CHECK(r.beta_threshold == doctest::Approx(a * a / 8));
      CHECK(r.min_sc_ab == doctest::Approx(0.5));
      CHECK(r.spectrum.positive);
      CHECK(r.spectrum.eig.lambda >= r.pointwise_bound - 1e-8);
      CHECK(r.pointwise_bound > 0);
    }
    // The potential itself goes negative, so positivity is not pointwise trivial.
    CHECK(conformal_psc_replay(c, 3, 3, sc_ab).min_sc < 0);
  }

  TEST_CASE("operator helpers") {
    const auto c = flat_torus_chart(2, 8, kTwoPi, [](const Eigen::Vector3d& x) { return 0.5 * std::cos(x(1)); });
    const auto op = weighted_laplacian_matrix(c);
    const Eigen::MatrixXd s = Eigen::MatrixXd(op.symmetrized());
    CHECK((s - s.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    const auto neg = op.negated("neg");
    CHECK((Eigen::MatrixXd(neg.matrix) + Eigen::MatrixXd(op.matrix)).cwiseAbs().maxCoeff() == 0);
    const auto shifted = op.plus_potential(Eigen::VectorXd::Constant(64, 2.0), "shift");
    CHECK(dense_spectrum(shifted).maxCoeff() == doctest::Approx(2.0).epsilon(1e-10));
  }
}
