#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "scurv/convergence.hpp"
#include "scurv/errors.hpp"
#include "scurv/generators.hpp"
#include "scurv/model_spaces.hpp"

using namespace scurv;

namespace {

std::vector<int> identity(std::size_t n) {
  std::vector<int> id(n);
  std::iota(id.begin(), id.end(), 0);
  return id;
}

std::vector<double> as_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

const FiniteMMSpace& s2_limit() {
  static const FiniteMMSpace s = sphere_sample(2, 1, 4000, Sampling::lattice, 3);
  return s;
}

}  // namespace

TEST_SUITE("convergence") {
  TEST_CASE("total variation against exhaustive subsets") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 200; ++trial) {
      Eigen::VectorXd mu(6), nu(6);
      for (int i = 0; i < 6; ++i) {
        mu(i) = u(rng);
        nu(i) = trial % 2 ? u(rng) : mu(i) * (1 + 0.2 * (u(rng) - 0.5));
      }
      REQUIRE(total_variation_distance(mu, nu) ==
              doctest::Approx(oracle::tv_bruteforce(as_vector(mu), as_vector(nu))).epsilon(1e-14));
    }
    CHECK(total_variation_distance(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)) == 1);
    const Eigen::VectorXd same = Eigen::VectorXd::LinSpaced(5, 1, 2);
    CHECK(total_variation_distance(same, same) == 0);
    CHECK_THROWS(total_variation_distance(Eigen::Vector2d(1, 0), Eigen::Vector3d(0, 1, 0)));
  }

  TEST_CASE("total variation is a metric") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 500; ++trial) {
      Eigen::VectorXd a(9), b(9), c(9);
      for (int i = 0; i < 9; ++i) a(i) = u(rng), b(i) = u(rng), c(i) = u(rng);
      const double ab = total_variation_distance(a, b);
      CHECK(ab == total_variation_distance(b, a));
      CHECK(ab <= total_variation_distance(a, c) + total_variation_distance(c, b) + 1e-14);
      CHECK(ab >= 0);
    }
  }

  TEST_CASE("epsilon-isometry defects") {
    const auto s = sphere_sample(2, 1, 200, Sampling::iid, 3);
    const MapBetweenSpaces id{&s, &s, identity(s.size())};
    CHECK(epsilon_isometry_defect(id).epsilon == 0);

    Eigen::Matrix2d d;
    d << 0, 2.5, 2.5, 0;
    const FiniteMMSpace two(DenseMetric{d}, Eigen::Vector2d(1, 1), 1);
    const MapBetweenSpaces collapse{&two, &two, {0, 0}};
    const auto rep = epsilon_isometry_defect(collapse);
    CHECK(rep.distortion == 2.5);
    CHECK(rep.surjectivity_defect == 2.5);
    CHECK(rep.epsilon == 2.5);
  }

  TEST_CASE("coarse grid into a fine grid is an h-isometry") {
    for (int k : {4, 5, 8}) {
      const auto coarse = flat_torus_grid({1.0, 1.0}, {k, k});
      const auto fine = flat_torus_grid({1.0, 1.0}, {2 * k, 2 * k});
      const auto& c = std::get<EmbeddedMetric>(coarse.metric()).coords;
      const auto& f = std::get<EmbeddedMetric>(fine.metric()).coords;
      std::vector<int> map(coarse.size());
      for (int i = 0; i < static_cast<int>(coarse.size()); ++i) {
        int best = 0;
        for (int j = 1; j < static_cast<int>(fine.size()); ++j)
          if ((f.row(j) - c.row(i)).norm() < (f.row(best) - c.row(i)).norm()) best = j;
        map[i] = best;
      }
      const auto rep = epsilon_isometry_defect({&coarse, &fine, map});
      CHECK(rep.epsilon <= 1.0 / k);
      CHECK(rep.epsilon > 0);
    }
  }

  TEST_CASE("spheres of shrinking radius converge at rate 1/i") {
    const auto base = sphere_sample(3, 1, 400, Sampling::stratified, 2);
    for (int i : {2, 4, 8, 16}) {
      const auto big = sphere_sample(3, 1 / std::pow(1 + 1.0 / i, 2), 400, Sampling::stratified, 2);
      const auto rep = epsilon_isometry_defect({&big, &base, identity(base.size())});
      CAPTURE(i);
      CHECK(rep.surjectivity_defect == 0);
      CHECK(rep.distortion == doctest::Approx(base.max_distance() / i).epsilon(1e-9));
      CHECK(rep.distortion <= oracle::pi / i + 1e-12);
    }
  }

  TEST_CASE("distance part of an isometry has zero defect") {
    const auto s = sphere_sample(2, 1, 100, Sampling::iid, 4);
    std::vector<int> perm = identity(s.size());
    std::mt19937_64 rng(1);
    std::shuffle(perm.begin(), perm.end(), rng);
    // Same atoms relabelled through a permutation of the dense matrix.
    Eigen::MatrixXd d(100, 100);
    for (int i = 0; i < 100; ++i)
      for (int j = 0; j < 100; ++j) d(perm[i], perm[j]) = s.distance(i, j);
    const FiniteMMSpace t(DenseMetric{d}, Eigen::VectorXd::Ones(100), 2);
    CHECK(epsilon_isometry_defect({&s, &t, perm}).epsilon <= 1e-15);
    perm[0] = perm[1];
    CHECK(epsilon_isometry_defect({&s, &t, perm}).epsilon > 0);
  }

  TEST_CASE("pushforward adds masses of fibres") {
    const auto s = interval_grid(1, 4);
    const auto t = interval_grid(1, 2);
    const auto push = pushforward({&s, &t, {0, 0, 1, 1}});
    CHECK(push(0) == doctest::Approx(0.5));
    CHECK(push(1) == doctest::Approx(0.5));
  }

  TEST_CASE("constant sequence replays trivially") {
    const auto& limit = s2_limit();
    const std::vector<FiniteMMSpace> seq(3, limit);
    const std::vector<std::vector<int>> maps(3, identity(limit.size()));
    const auto r = stability_experiment(seq, maps, limit, 2, 1.8, 1.0);
    CHECK(r.limit_pass);
    CHECK(r.epsilon_nonincreasing);
    CHECK(r.tv_nonincreasing);
    CHECK(r.inflation_all);
    for (const auto& st : r.steps) {
      CHECK(st.tv == 0);
      CHECK(st.distortion.epsilon == 0);
    }
  }

  TEST_CASE("mass perturbations converge in total variation") {
    const auto& limit = s2_limit();
    std::vector<FiniteMMSpace> seq;
    for (int i = 3; i <= 7; ++i) {
      Eigen::VectorXd m = limit.mass();
      for (Eigen::Index k = 0; k < m.size(); ++k) m(k) *= 1 + (k % 2 ? -1.0 : 1.0) / i;
      seq.emplace_back(limit.metric(), m, 2, limit.sampling());
    }
    const std::vector<std::vector<int>> maps(seq.size(), identity(limit.size()));
    const auto r = stability_experiment(seq, maps, limit, 2, 1.8, 1.0);
    CHECK(r.tv_decreasing);
    for (std::size_t k = 0; k < r.steps.size(); ++k) {
      // Exactly half the alternating perturbation survives in the sup.
      const double half = 0.5 * std::abs(limit.mass()(Eigen::seq(0, Eigen::last, 2)).sum() -
                                         limit.mass()(Eigen::seq(1, Eigen::last, 2)).sum());
      const double expected = (limit.total_mass() / 2 + half) / (k + 3);
      CHECK(r.steps[k].tv == doctest::Approx(expected).epsilon(0.05));
      CHECK(r.steps[k].inflation_holds);
    }
    CHECK(r.limit_pass);
    CHECK(r.inflation_all);
  }

  TEST_CASE("missing certificates are a precondition error") {
    const auto& limit = s2_limit();
    // Inflated masses: every ball beats the model.
    const std::vector<FiniteMMSpace> seq{FiniteMMSpace(limit.metric(), 1.5 * limit.mass(), 2, limit.sampling())};
    StabilityConfig cfg;
    cfg.certifier.require_ndim = false;
    CHECK_THROWS_AS(stability_experiment(seq, {identity(limit.size())}, limit, 2, 1.8, 1.0, cfg), PreconditionError);
  }

  TEST_CASE("tangent rescaling") {
    const auto t = flat_torus_grid({2 * oracle::pi, 2 * oracle::pi}, {40, 40});
    const auto seq = tangent_rescale_sequence(t, 0, {1.0, 2.0, 4.0}, 1.0);
    REQUIRE(seq.size() == 3);
    const auto& e = std::get<EmbeddedMetric>(t.metric()).coords;
    // Ball around atom 0 lifted to the plane, unwrapping across the seam.
    std::vector<Eigen::Vector2d> lifted;
    for (int j = 0; j < static_cast<int>(t.size()); ++j) {
      if (t.distance(0, j) > 1.0 * (1 + 1e-12)) continue;
      Eigen::Vector2d v(e(j, 0) - e(0, 0), e(j, 1) - e(0, 1));
      for (int a = 0; a < 2; ++a)
        if (v(a) > oracle::pi) v(a) -= 2 * oracle::pi;
      lifted.push_back(v);
    }
    for (const auto& ps : seq) {
      REQUIRE(ps.space.size() == lifted.size());
      for (std::size_t i = 0; i < lifted.size(); i += 3)
        for (std::size_t j = 0; j < lifted.size(); ++j)
          REQUIRE(ps.space.distance(static_cast<int>(i), static_cast<int>(j)) ==
                  doctest::Approx(ps.lambda * (lifted[i] - lifted[j]).norm()).epsilon(1e-12));
    }
    CHECK(seq[0].space.total_mass() == doctest::Approx(restrict_space(t, [&] {
                                                         std::vector<int> b;
                                                         for (int j = 0; j < static_cast<int>(t.size()); ++j)
                                                           if (t.distance(0, j) <= 1.0 * (1 + 1e-12)) b.push_back(j);
                                                         return b;
                                                       }()).total_mass()));

    // Blown-up round sphere looks Euclidean at unit scale.
    const auto s = sphere_sample(2, 1, 20000, Sampling::lattice, 0);
    const auto blow = tangent_rescale_sequence(s, 0, {10.0}, 0.5).front();
    for (double r : {2.0, 2.5, 3.0}) {
      CAPTURE(r);
      CHECK(ball_measure(blow.space, blow.base, r) == doctest::Approx(oracle::pi * r * r).epsilon(0.01));
    }
    CHECK_THROWS_AS(tangent_rescale_sequence(s, 0, {2.0, 1.0}, 0.5), DomainError);
  }
}
