#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "scurv/errors.hpp"
#include "scurv/geodesic.hpp"
#include "scurv/model_spaces.hpp"

using namespace scurv;

namespace {

int center(const ChartMetric& c) { return c.index(c.shape[0] / 2, c.n > 1 ? c.shape[1] / 2 : 0, c.n > 2 ? c.shape[2] / 2 : 0); }

Eigen::Matrix3d flat(const Eigen::Vector3d&) { return Eigen::Matrix3d::Identity(); }

}  // namespace

TEST_SUITE("geodesic") {
  TEST_CASE("interpolant reproduces affine fields and wraps periodic axes") {
    const auto c = flat_torus_chart(2, 16, 1.0);
    const ChartInterpolant ip(c);
    Eigen::VectorXd lin(static_cast<Eigen::Index>(c.nodes()));
    const auto open = make_chart(2, {12, 12, 1}, {0, 0, 0}, {0.1, 0.1, 1}, {false, false, false}, flat,
                                 [](const Eigen::Vector3d& x) { return 0.3 + 2 * x(0) - x(1); }, "affine");
    const ChartInterpolant io(open);
    for (double x : {0.23, 0.41, 0.77})
      for (double y : {0.15, 0.5, 0.93}) {
        const auto [f, grad] = io.density(Eigen::Vector3d(x, y, 0));
        CHECK(f == doctest::Approx(0.3 + 2 * x - y).epsilon(1e-12));
        CHECK(grad(0) == doctest::Approx(2).epsilon(1e-12));
        CHECK(grad(1) == doctest::Approx(-1).epsilon(1e-12));
      }
    const auto s = ip.eval(Eigen::Vector3d(0.3, 0.7, 0));
    CHECK((s.g - Eigen::Matrix3d::Identity()).norm() <= 1e-14);
    for (const auto& d : s.dg) CHECK(d.norm() <= 1e-14);
    CHECK(ip.inside(Eigen::Vector3d(7.3, -2.0, 0)));
    CHECK_FALSE(io.inside(Eigen::Vector3d(1.5, 0.5, 0)));

    // Periodic wrap: shifting by a period changes nothing.
    const auto b = flat_torus_chart(2, 16, 1.0, [](const Eigen::Vector3d& x) { return std::sin(2 * oracle::pi * x(0)); });
    const ChartInterpolant ib(b);
    CHECK(ib.density(Eigen::Vector3d(0.37, 0.2, 0)).first ==
          doctest::Approx(ib.density(Eigen::Vector3d(1.37, -0.8, 0)).first).epsilon(1e-13));
  }

  TEST_CASE("flat plane discs") {
    const auto c = make_chart(2, {41, 41, 1}, {-1, -1, 0}, {0.05, 0.05, 1}, {false, false, false}, flat, {}, "plane");
    for (double r : {0.1, 0.3, 0.6}) {
      CHECK(std::abs(weighted_ball_volume(c, center(c), r) - oracle::pi * r * r) <= 1e-6);
    }
    const auto e = volume_expansion_fit(flat_torus_chart(2, 32, 2 * oracle::pi), center(flat_torus_chart(2, 32, 2 * oracle::pi)), 0.1, 1.0);
    CHECK(std::abs(e.deficit) <= 1e-6);
    CHECK(std::abs(e.fit.r4) <= 1e-6);
    CHECK(std::abs(e.predicted) <= 1e-12);
    CHECK(std::abs(e.predicted_r4) <= 1e-12);
  }

  TEST_CASE("round sphere caps") {
    const auto c = round_sphere_patch(65, 1.0);
    for (double r : {0.1, 0.2, 0.4}) {
      CAPTURE(r);
      CHECK(std::abs(weighted_ball_volume(c, center(c), r) - oracle::sphere2_cap(1, r)) <= 1e-5);
    }
    const auto vols = weighted_ball_volumes(c, center(c), {0.1, 0.2, 0.3});
    for (double e : vols.richardson) CHECK(e <= 1e-7);
    for (std::size_t k = 0; k < 3; ++k)
      CHECK(vols.ratios[k] == doctest::Approx(vols.volumes[k] / (oracle::pi * vols.radii[k] * vols.radii[k])));
    const auto e = volume_expansion_fit(c, center(c), 0.05, 0.4);
    CHECK(e.deficit == doctest::Approx(1.0 / 12).epsilon(0.01));
    CHECK(e.predicted == doctest::Approx(1.0 / 12).epsilon(0.01));
    CHECK(e.relative_error <= 0.01);
    // Fourth order term of the 2-sphere cap: 2(1 - cos r)/r^2 = 1 - r^2/12 + r^4/360.
    CHECK(e.fit.r4 == doctest::Approx(1.0 / 360).epsilon(0.25));
    CHECK(e.predicted_r4 == doctest::Approx(1.0 / 360).epsilon(0.05));
  }

  TEST_CASE("Gaussian density plane") {
    const auto c = gaussian_density_plane(65, 2.0);
    const auto e = volume_expansion_fit(c, center(c), 0.05, 0.5);
    // Sc = 0, Delta f = 1, grad f = 0 at the origin: (3 * 1) / 24.
    CHECK(e.predicted == doctest::Approx(0.125).epsilon(1e-6));
    CHECK(e.deficit == doctest::Approx(0.125).epsilon(0.05));

    // Closed form: int_0^r e^{-s^2/4} 2 pi s ds = 4 pi (1 - e^{-r^2/4}).
    for (double r : {0.2, 0.5, 1.0}) {
      CHECK(weighted_ball_volume(c, center(c), r) == doctest::Approx(4 * oracle::pi * (1 - std::exp(-r * r / 4))).epsilon(1e-6));
    }
  }

  TEST_CASE("one-dimensional quadratic density") {
    const auto c = make_chart(2, {41, 41, 1}, {-1, -1, 0}, {0.05, 0.05, 1}, {false, false, false}, flat,
                              [](const Eigen::Vector3d& x) { return x(0) * x(0) / 4; }, "quadratic");
    const auto e = volume_expansion_fit(c, center(c), 0.05, 0.5);
    CHECK(e.predicted == doctest::Approx(1.5 / 24).epsilon(1e-6));
    CHECK(e.deficit == doctest::Approx(1.5 / 24).epsilon(0.05));
  }

  TEST_CASE("sphere with a bump density") {
    const auto c = round_sphere_patch(65, 1.0, [](const Eigen::Vector3d& u) {
      return 0.5 * std::exp(-(u(0) * u(0) + 0.5 * u(1) * u(1))) + 0.2 * u(0);
    });
    const auto e = volume_expansion_fit(c, center(c), 0.05, 0.4);
    CHECK(e.relative_error <= 0.05);
  }

  TEST_CASE("product S2 x R chart") {
    const auto c = sphere_line_product(25, 0.8);
    GeodesicConfig cfg;
    cfg.angles = 32;
    cfg.polar = 16;
    cfg.steps = 128;
    const auto e = volume_expansion_fit(c, center(c), 0.05, 0.4, true, cfg);
    CHECK(e.predicted == doctest::Approx(2.0 / 30).epsilon(0.02));
    CHECK(e.deficit == doctest::Approx(2.0 / 30).epsilon(0.03));
    // |Rie|^2 = 4, |Ric|^2 = 2, Sc = 2: (-12 + 16 + 20) / (360 * 5 * 7) > 0.
    CHECK(e.predicted_r4 == doctest::Approx(24.0 / 12600).epsilon(0.1));
    CHECK(e.fit.r4 > 0);
    for (double r : {0.2, 0.35}) {
      CHECK(weighted_ball_volume(c, center(c), r, cfg) == doctest::Approx(product_ball_volume(1, 3, r)).epsilon(1e-3));
    }
  }

  TEST_CASE("escaping geodesics are reported") {
    const auto c = round_sphere_patch(33, 0.5);
    try {
      weighted_ball_volume(c, center(c), 2.0);
      FAIL("expected an escape");
    } catch (const DomainError& e) {
      CHECK(std::string(e.what()).find("radius") != std::string::npos);
    }
  }
}
