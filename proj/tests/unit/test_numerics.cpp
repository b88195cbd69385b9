#include <gtest/gtest.h>

#include <cmath>

#include "finsler/error.hpp"
#include "finsler/numerics.hpp"

using namespace finsler;

TEST(Numerics, UnitBallVolumes) {
  EXPECT_DOUBLE_EQ(unit_ball_volume(1), 2.0);
  EXPECT_NEAR(unit_ball_volume(2), kPi, 1e-15);
  EXPECT_NEAR(unit_ball_volume(3), 4.0 * kPi / 3.0, 1e-14);
  EXPECT_NEAR(sphere_area(3), 4.0 * kPi, 1e-14);
  EXPECT_NEAR(sphere_area(2), 2.0 * kPi, 1e-15);
}

class SphereGridLevels : public ::testing::TestWithParam<int> {};

TEST_P(SphereGridLevels, WeightsAntipodesAndMoments) {
  const DirectionGrid& g = sphere_grid(3, GetParam());
  double total = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_NEAR(g.nodes[i].norm(), 1.0, 1e-14);
    const std::size_t a = g.antipode[i];
    EXPECT_NEAR((g.nodes[a] + g.nodes[i]).norm(), 0.0, 1e-14);
    EXPECT_EQ(g.weights[a], g.weights[i]);
    total += g.weights[i];
  }
  EXPECT_NEAR(total, 4.0 * kPi, 1e-12);
  // int z^2 = 4 pi / 3; int x y = 0.
  EXPECT_NEAR(integrate_sphere(g, [](const Vec3& u) { return u.z() * u.z(); }), 4.0 * kPi / 3.0,
              2e-2 * std::pow(0.25, GetParam()));
  EXPECT_NEAR(integrate_sphere(g, [](const Vec3& u) { return u.x() * u.y(); }), 0.0, 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Levels, SphereGridLevels, ::testing::Values(1, 2, 3, 4));

TEST(Numerics, SphereGridSizes) {
  EXPECT_EQ(sphere_grid(3, 3).size(), 642u);
  EXPECT_EQ(sphere_grid(3, 5).size(), 10242u);
  EXPECT_EQ(sphere_grid(2, 0).size(), 64u);
  EXPECT_EQ(sphere_grid(2, 3).size(), 512u);
}

TEST(Numerics, CircleGridIsExactForTrigPolynomials) {
  const DirectionGrid& g = sphere_grid(2, 0);
  const double v = integrate_sphere(g, [](const Vec3& u) { return std::pow(u.x(), 4); });
  EXPECT_NEAR(v, 3.0 * kPi / 4.0, 1e-13);
}

TEST(Numerics, IntegrateRejectsNonFinite) {
  EXPECT_THROW(integrate_sphere(sphere_grid(3, 1), [](const Vec3&) { return std::nan(""); }),
               InputError);
}

TEST(Numerics, GaussLegendreIsExactToDegree2nMinus1) {
  for (int n : {4, 8, 24, 64}) {
    const int deg = 2 * n - 1;
    const double v = gauss_integrate([deg](double t) { return std::pow(t, deg - 1); }, 0.0, 1.0, n);
    EXPECT_NEAR(v, 1.0 / deg, 1e-13) << n;
  }
}

TEST(Numerics, AdaptiveIntegral) {
  EXPECT_NEAR(adaptive_integrate([](double t) { return std::sqrt(t); }, 0.0, 1.0), 2.0 / 3.0, 1e-9);
  EXPECT_NEAR(adaptive_integrate([](double t) { return std::exp(std::sin(t)); }, 0.0, 2 * kPi),
              2 * kPi * std::cyl_bessel_i(0.0, 1.0), 1e-10);
}

TEST(Numerics, MaximizeOnCircle) {
  const auto m = maximize_on_circle([](double t) { return std::cos(t - 1.234) + 0.1; });
  EXPECT_NEAR(m.angle, 1.234, 1e-7);
  EXPECT_NEAR(m.value, 1.1, 1e-12);
}

TEST(Numerics, MaximizeOnSphere) {
  const Vec3 target = Vec3(0.3, -0.5, 0.8).normalized();
  const auto m = maximize_on_sphere([&](const Vec3& u) { return u.dot(target); });
  EXPECT_NEAR((m.direction - target).norm(), 0.0, 1e-7);
  EXPECT_NEAR(m.value, 1.0, 1e-12);
}

TEST(Numerics, TangentFrameIsOrthonormal) {
  for (const Vec3& x : sphere_grid(3, 1).nodes) {
    const auto [e1, e2] = tangent_frame(x);
    EXPECT_NEAR(e1.norm(), 1.0, 1e-14);
    EXPECT_NEAR(e2.norm(), 1.0, 1e-14);
    EXPECT_NEAR(e1.dot(e2), 0.0, 1e-14);
    EXPECT_NEAR(e1.dot(x), 0.0, 1e-14);
    EXPECT_NEAR(e1.cross(e2).dot(x), 1.0, 1e-14);
  }
}

TEST(Numerics, CompensatedSumRecoversCancellation) {
  std::vector<double> xs = {1e16, 1.0, -1e16, 1.0};
  EXPECT_EQ(compensated_sum(xs), 2.0);
}

TEST(Numerics, ParallelForIsOrderIndependent) {
  std::vector<double> a(1000), b(1000);
  parallel_for(a.size(), 1, [&](std::size_t i) { a[i] = std::sin(double(i)); });
  parallel_for(b.size(), 4, [&](std::size_t i) { b[i] = std::sin(double(i)); });
  EXPECT_EQ(a, b);
}

TEST(Numerics, DirectionalDerivative) {
  auto g = [](const Vec3& v) { return v.squaredNorm(); };
  EXPECT_NEAR(directional_derivative(g, Vec3(1, 2, 3), Vec3(0, 1, 0)), 4.0, 1e-8);
}
