#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "scurv/errors.hpp"
#include "scurv/generators.hpp"
#include "scurv/mm_space.hpp"
#include "scurv/model_spaces.hpp"

using namespace scurv;

namespace {

FiniteMMSpace random_dense_space(int count, std::uint64_t seed, int dim = 2) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  RowMatrix pts(count, 2);
  for (int i = 0; i < count; ++i) pts.row(i) << u(rng), u(rng);
  Eigen::MatrixXd d(count, count);
  for (int i = 0; i < count; ++i)
    for (int j = 0; j < count; ++j) d(i, j) = (pts.row(i) - pts.row(j)).norm();
  Eigen::VectorXd mass(count);
  for (int i = 0; i < count; ++i) mass(i) = 0.5 + u(rng);
  return FiniteMMSpace(DenseMetric{d}, mass, dim);
}

}  // namespace

TEST_SUITE("mm_space") {
  TEST_CASE("ball measure basics") {
    const auto s = random_dense_space(40, 3);
    for (int x : {0, 7, 39}) {
      CHECK(ball_measure(s, x, 0) == s.mass()(x));
      CHECK(ball_measure(s, x, 10) == doctest::Approx(s.total_mass()).epsilon(1e-14));
      double prev = 0;
      for (int k = 0; k <= 100; ++k) {
        const double m = ball_measure(s, x, 0.015 * k);
        CHECK(m >= prev);
        prev = m;
      }
    }
    CHECK_THROWS_AS(ball_measure(s, 40, 0.1), DomainError);
    CHECK_THROWS_AS(ball_measure(s, -1, 0.1), DomainError);
  }

  TEST_CASE("staircase is right-continuous at the jump points") {
    const auto s = random_dense_space(30, 4);
    for (int j = 1; j < 30; ++j) {
      const double d = s.distance(0, j);
      CHECK(ball_measure(s, 0, d) >= ball_measure(s, 0, d * (1 - 1e-9)) + s.mass()(j) * (1 - 1e-12));
    }
  }

  TEST_CASE("ball table agrees with direct ball measures") {
    const auto s = sphere_sample(2, 1, 500, Sampling::iid, 9);
    const std::vector<double> radii{0.1, 0.2, 0.4, 0.8};
    const auto table = ball_table(s, radii);
    for (int c = 0; c < static_cast<int>(s.size()); c += 37) {
      for (std::size_t k = 0; k < radii.size(); ++k) {
        CHECK(table.measure(c, k) == doctest::Approx(ball_measure(s, c, radii[k])).epsilon(1e-13));
      }
    }
  }

  TEST_CASE("S2 samples carry cap-sized balls") {
    // Zonal cells give every ball of radius 0.5 within 5% of the cap area.
    const auto s = sphere_sample(2, 1, 10000, Sampling::stratified, 5);
    CHECK(s.total_mass() == doctest::Approx(4 * oracle::pi).epsilon(1e-12));
    const double cap = oracle::sphere2_cap(1, 0.5);
    for (int x = 0; x < static_cast<int>(s.size()); ++x) {
      const double ratio = ball_measure(s, x, 0.5) / cap;
      REQUIRE(ratio >= 0.95);
      REQUIRE(ratio <= 1.05);
    }
  }

  TEST_CASE("metric axioms of generated spaces") {
    const std::vector<FiniteMMSpace> spaces{sphere_sample(3, 2, 60, Sampling::iid, 1),
                                            flat_torus_grid({1.0, 2.0}, {6, 7}), hyperbolic_disk(1.5, 50),
                                            interval_grid(3, 20)};
    for (const auto& s : spaces) {
      const Eigen::MatrixXd d = distance_matrix(s);
      const double tol = 1e-9 * d.maxCoeff();
      const int n = static_cast<int>(s.size());
      CHECK((d - d.transpose()).cwiseAbs().maxCoeff() <= tol);
      CHECK(d.diagonal().cwiseAbs().maxCoeff() == 0);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; k += 3) REQUIRE(d(i, j) <= d(i, k) + d(k, j) + tol);
      CHECK(s.mass().minCoeff() > 0);
    }
  }

  TEST_CASE("resolution is the median nearest-neighbour distance") {
    const auto s = random_dense_space(25, 8);
    const Eigen::MatrixXd d = distance_matrix(s);
    std::vector<double> nn;
    for (int i = 0; i < 25; ++i) {
      double best = INFINITY;
      for (int j = 0; j < 25; ++j)
        if (j != i && d(i, j) > 0) best = std::min(best, d(i, j));
      nn.push_back(best);
    }
    std::sort(nn.begin(), nn.end());
    CHECK(s.resolution() == doctest::Approx(nn[12]).epsilon(1e-14));
  }

  TEST_CASE("generators") {
    const auto one = sphere_sample(2, 1, 1, Sampling::iid, 1);
    CHECK(one.size() == 1);
    CHECK(one.mass()(0) == doctest::Approx(4 * oracle::pi).epsilon(1e-14));

    // Quotient distance on the torus equals the minimum over the lattice shifts.
    const double len = 2 * oracle::pi;
    const auto t = flat_torus_grid({len, len}, {9, 9});
    const auto& e = std::get<EmbeddedMetric>(t.metric());
    for (int i = 0; i < 81; i += 4) {
      for (int j = 0; j < 81; ++j) {
        double best = INFINITY;
        for (int a = -1; a <= 1; ++a)
          for (int b = -1; b <= 1; ++b)
            best = std::min(best, std::hypot(e.coords(i, 0) - e.coords(j, 0) + a * len,
                                             e.coords(i, 1) - e.coords(j, 1) + b * len));
        REQUIRE(t.distance(i, j) == doctest::Approx(best).epsilon(1e-12));
      }
    }
    CHECK(t.total_mass() == doctest::Approx(len * len).epsilon(1e-12));

    const auto a = sphere_sample(3, 1, 300, Sampling::stratified, 11);
    const auto b = sphere_sample(3, 1, 300, Sampling::stratified, 11);
    CHECK(distance_matrix(a) == distance_matrix(b));
    CHECK(a.mass() == b.mass());
    const auto c = sphere_sample(3, 1, 300, Sampling::stratified, 12);
    CHECK(distance_matrix(a) != distance_matrix(c));

    CHECK(hyperbolic_disk(2, 400).total_mass() == doctest::Approx(2 * oracle::pi * (std::cosh(2.0) - 1)).epsilon(1e-12));
    CHECK(sampling_from_string(to_string(Sampling::lattice)) == Sampling::lattice);
    CHECK_THROWS(sampling_from_string("bogus"));
    CHECK_THROWS_AS(sphere_sample(2, 1, 0), DomainError);
  }

  TEST_CASE("n-dimensional condition on the flat torus grid") {
    const auto t = flat_torus_grid({2 * oracle::pi, 2 * oracle::pi}, {64, 64});
    const double h = t.resolution();
    const auto report = ndim_condition_fit(t, 2, 4 * h, 20 * h);
    CHECK(report.pass);
    for (double c : report.intercepts) REQUIRE(std::abs(c - 1) <= 0.02);

    FiniteMMSpace doubled(t.metric(), 2 * t.mass(), 2);
    const auto bad = ndim_condition_fit(doubled, 2, 4 * h, 20 * h);
    CHECK_FALSE(bad.pass);
    for (double c : bad.intercepts) REQUIRE(c == doctest::Approx(2).epsilon(0.02));

    CHECK_THROWS_AS(ndim_condition_fit(t, 2, h, 20 * h), PreconditionError);
    CHECK_THROWS_AS(ndim_condition_fit(t, 2, 10 * h, 5 * h), PreconditionError);
  }

  TEST_CASE("a surface tested as a 3-dimensional space fails") {
    // Ball measures scale like r^2, so the ratio against r^3 blows up.
    const auto s = sphere_sample(2, 1, 4000, Sampling::stratified, 1);
    const auto report = ndim_condition_fit(s, 3, 2 * s.resolution(), 0.6);
    CHECK_FALSE(report.pass);
    for (double c : report.intercepts) REQUIRE(c > 1.5);
  }

  TEST_CASE("scaling: exact pushforward identity") {
    const std::vector<FiniteMMSpace> spaces{random_dense_space(30, 1, 2), random_dense_space(30, 2, 3),
                                            sphere_sample(3, 1, 200, Sampling::iid, 4),
                                            flat_torus_grid({1.0, 1.0, 1.0}, {4, 4, 4})};
    for (const auto& s : spaces) {
      const int n = s.dim_hint();
      const auto same = scale_space(s, 1.0);
      CHECK(distance_matrix(same) == distance_matrix(s));
      CHECK(same.mass() == s.mass());
      for (double lam : {0.5, 2.0, 3.0, 0.37}) {
        const auto sl = scale_space(s, lam);
        CHECK(sl.resolution() == doctest::Approx(lam * s.resolution()).epsilon(1e-14));
        for (int x = 0; x < static_cast<int>(s.size()); x += 5) {
          for (double r : {0.0, 0.05, 0.2, 0.5, 1.0}) {
            REQUIRE(ball_measure(sl, x, lam * r) ==
                    doctest::Approx(std::pow(lam, n) * ball_measure(s, x, r)).epsilon(1e-14));
          }
        }
      }
    }
    // lambda = 2, n = 3: balls at doubled radii carry exactly 8 times the mass.
    const auto s = spaces[1];
    const auto s2 = scale_space(s, 2);
    CHECK(ball_measure(s2, 0, 0.6) == 8 * ball_measure(s, 0, 0.3));
    CHECK_THROWS_AS(scale_space(s, 0), DomainError);
    CHECK_THROWS_AS(scale_space(s, -1), DomainError);
  }

  TEST_CASE("scaling preserves the n-dimensional verdict") {
    const auto t = flat_torus_grid({2 * oracle::pi, 2 * oracle::pi}, {48, 48});
    const double h = t.resolution();
    for (double lam : {0.5, 3.0}) {
      const auto a = ndim_condition_fit(t, 2, 4 * h, 20 * h);
      const auto b = ndim_condition_fit(scale_space(t, lam), 2, 4 * h * lam, 20 * h * lam);
      CHECK(a.pass == b.pass);
      CHECK(a.max_deviation == doctest::Approx(b.max_deviation).epsilon(1e-9));
    }
  }

  TEST_CASE("products") {
    const auto a = random_dense_space(12, 5);
    const auto pt = point_space(1.0, 1);
    const auto ap = product_space(a, pt);
    CHECK(check_isometry(std::vector<int>([] {
                           std::vector<int> id(12);
                           std::iota(id.begin(), id.end(), 0);
                           return id;
                         }()),
                         a, ap)
              .isometric);

    const auto b = interval_grid(2, 7);
    const auto ab = product_space(a, b);
    CHECK(ab.size() == 84);
    CHECK(ab.dim_hint() == a.dim_hint() + 1);
    CHECK(ab.total_mass() == doctest::Approx(a.total_mass() * b.total_mass()).epsilon(1e-13));
    const Eigen::MatrixXd d = distance_matrix(ab);
    for (int i = 0; i < 84; i += 5)
      for (int j = 0; j < 84; ++j) {
        const double expect = std::hypot(a.distance(i / 7, j / 7), b.distance(i % 7, j % 7));
        REQUIRE(d(i, j) == doctest::Approx(expect).epsilon(1e-14));
        for (int k = 0; k < 84; k += 11) REQUIRE(d(i, j) <= d(i, k) + d(k, j) + 1e-12);
      }
    CHECK_THROWS_AS(product_space(a, b, 50), ResourceError);
  }

  TEST_CASE("product of S2 and a segment matches the product model balls") {
    const auto s2 = sphere_sample(2, 1, 1200, Sampling::lattice, 0);
    const auto seg = interval_grid(3, 40);
    const auto prod = product_space(s2, seg);
    for (int i = 0; i < static_cast<int>(s2.size()); i += 101) {
      const int x = i * 40 + 20;  // middle of the segment
      for (double r : {0.4, 0.6, 0.9}) {
        CAPTURE(r);
        REQUIRE(ball_measure(prod, x, r) == doctest::Approx(product_ball_volume(1, 3, r)).epsilon(0.05));
      }
    }
  }

  TEST_CASE("isometry checks") {
    const auto s = random_dense_space(20, 6);
    std::vector<int> id(20);
    std::iota(id.begin(), id.end(), 0);
    const auto same = check_isometry(id, s, s);
    CHECK(same.isometric);
    CHECK(same.bijective);
    CHECK(same.distance_defect == 0);

    const auto big = scale_space(s, 1.5);
    // scale_space also rescales masses, so compare against a copy with the original masses.
    const FiniteMMSpace stretched(DenseMetric{1.5 * distance_matrix(s)}, s.mass(), 2);
    const auto scaled = check_isometry(id, s, stretched);
    CHECK_FALSE(scaled.isometric);
    CHECK(scaled.distance_defect == doctest::Approx(0.5 * distance_matrix(s).maxCoeff()).epsilon(1e-12));
    CHECK_FALSE(check_isometry(id, s, big).isometric);

    // All distances and masses equal: every permutation is an isometry.
    const int n = 6;
    Eigen::MatrixXd d = Eigen::MatrixXd::Constant(n, n, 1.0);
    d.diagonal().setZero();
    const FiniteMMSpace simplex(DenseMetric{d}, Eigen::VectorXd::Constant(n, 0.25), 1);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    int count = 0;
    do {
      REQUIRE(check_isometry(perm, simplex, simplex).isometric);
      ++count;
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(count == 720);

    // Symmetric under inversion.
    std::mt19937_64 rng(3);
    std::shuffle(id.begin(), id.end(), rng);
    Eigen::MatrixXd dp(20, 20);
    Eigen::VectorXd mp(20);
    for (int i = 0; i < 20; ++i) {
      mp(id[i]) = s.mass()(i);
      for (int j = 0; j < 20; ++j) dp(id[i], id[j]) = s.distance(i, j);
    }
    const FiniteMMSpace permuted(DenseMetric{dp}, mp, 2);
    CHECK(check_isometry(id, s, permuted).isometric);
    std::vector<int> inv(20);
    for (int i = 0; i < 20; ++i) inv[id[i]] = i;
    CHECK(check_isometry(inv, permuted, s).isometric);

    std::vector<int> collapse(20, 0);
    CHECK_FALSE(check_isometry(collapse, s, s).bijective);
  }

  TEST_CASE("restriction inherits distances and masses") {
    const auto s = random_dense_space(30, 7);
    const std::vector<int> idx{3, 5, 8, 13, 21};
    const auto r = restrict_space(s, idx);
    CHECK(r.size() == 5);
    for (int i = 0; i < 5; ++i) {
      CHECK(r.mass()(i) == s.mass()(idx[i]));
      for (int j = 0; j < 5; ++j) CHECK(r.distance(i, j) == s.distance(idx[i], idx[j]));
    }
  }

  TEST_CASE("construction rejects bad inputs") {
    Eigen::MatrixXd d(2, 2);
    d << 0, 1, 1, 0;
    CHECK_THROWS(FiniteMMSpace(DenseMetric{d}, Eigen::Vector2d(1, 0), 1));
    CHECK_THROWS(FiniteMMSpace(DenseMetric{d}, Eigen::Vector3d(1, 1, 1), 1));
    Eigen::MatrixXd asym(2, 2);
    asym << 0, 1, 2, 0;
    CHECK_THROWS(FiniteMMSpace(DenseMetric{asym}, Eigen::Vector2d(1, 1), 1));
  }
}
