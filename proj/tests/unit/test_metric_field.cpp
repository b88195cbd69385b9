#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "finsler/error.hpp"
#include "finsler/metric_field.hpp"
#include "support.hpp"

using namespace finsler;

TEST(MetricField, RoundMetricSeesTangentialPart) {
  const MetricField r = round_metric(2.0);
  const Vec3 x(0, 0, 1);
  EXPECT_NEAR(r(x, Vec3(3, 4, 7)), 10.0, 1e-14);
  EXPECT_TRUE(r.is_reversible());
  EXPECT_EQ(r.dim(), 2);
}

TEST(MetricField, RoundDensityAndVolume) {
  const MetricField r = round_metric(1.0);
  EXPECT_NEAR(ht_volume_density(r, Vec3(0.6, 0.0, 0.8)), 1.0, 1e-8);
  EXPECT_NEAR(ht_volume(r, WholeSphere{3}), 4.0 * kPi, 1e-6);
  EXPECT_NEAR(ht_volume(round_metric(2.0), WholeSphere{2}), 16.0 * kPi, 1e-5);
}

TEST(MetricField, FunkBallClosedFormMatchesRayCasting) {
  const MetricField closed = funk_ball(2);
  const MetricField cast = funk_field(ball_domain(), 2);
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    const Vec3 x = 0.7 * test::random_unit(rng, 2) * (i / 20.0);
    const Vec3 v = test::random_unit(rng, 2);
    EXPECT_NEAR(closed(x, v), cast(x, v), 1e-9 * closed(x, v));
  }
}

TEST(MetricField, FunkBallDensityMatchesPolarDiscArea) {
  // The co-disc is the polar of the unit disc centred at -x, whose area is
  // pi / (1 - |x|^2)^(3/2).
  const MetricField f = funk_ball(2);
  for (double r : {0.0, 0.3, 0.6}) {
    const Vec3 x(r * 0.6, r * 0.8, 0.0);
    EXPECT_NEAR(ht_volume_density(f, x), std::pow(1.0 - r * r, -1.5), 1e-6) << r;
  }
}

TEST(MetricField, FunkBallGradientMatchesFiniteDifferences) {
  const MetricField f = funk_ball(2);
  const Vec3 x(0.3, -0.2, 0.0), v(0.5, 0.7, 0.0);
  const Vec3 g = f.gradient(x, v);
  for (int i = 0; i < 2; ++i) {
    Vec3 e = Vec3::Zero();
    e[i] = 1e-6;
    EXPECT_NEAR(g[i], (f(x, v + e) - f(x, v - e)) / 2e-6, 1e-6);
  }
}

TEST(MetricField, HilbertIsReversibleAverageOfFunk) {
  const MetricField h = hilbert_ball(2);
  const MetricField f = funk_ball(2);
  const Vec3 x(0.2, 0.4, 0.0), v(0.3, -0.9, 0.0);
  EXPECT_NEAR(h(x, v), h(x, -v), 1e-12);
  EXPECT_NEAR(h(x, v), 0.5 * (f(x, v) + f(x, -v)), 1e-12);
}

TEST(MetricField, RandersChartDensityIsEuclidean) {
  const MetricField r = randers_chart(2, Eigen::Matrix3d::Identity(), OneFormField::constant(Vec3(0.4, 0.1, 0)));
  EXPECT_NEAR(ht_volume_density(r, Vec3(0.5, 0.5, 0)), 1.0, 1e-7);
}

TEST(MetricField, EuclideanBoxVolume) {
  const MetricField e = euclidean_field(2);
  EXPECT_NEAR(ht_volume(e, BoxRegion{Vec3(0, 0, 0), Vec3(2, 3, 0), 8}), 6.0, 1e-6);
  EXPECT_NEAR(ht_volume(euclidean_field(3), BallRegion{Vec3::Zero(), 1.0, 8}), 4.0 * kPi / 3.0, 1e-3);
}

TEST(MetricField, AddOneFormRejectsNonPositiveResult) {
  EXPECT_THROW(add_one_form(round_metric(), OneFormField::exact_linear(true, Vec3(0, 0, 2))), InputError);
  EXPECT_THROW(add_one_form(funk_ball(2), OneFormField::exact_linear(true, Vec3(0, 0, 0.1))), InputError);
}

TEST(MetricField, AddExactFormKeepsDensity) {
  const MetricField f = add_one_form(round_metric(), OneFormField::exact_linear(true, Vec3(0.1, 0.2, 0.3)));
  EXPECT_NEAR(ht_volume_density(f, Vec3(0, 0.6, 0.8)), 1.0, 1e-7);
  EXPECT_FALSE(f.is_reversible());
}

TEST(MetricField, ScaleAverageReverseSymmetrize) {
  const MetricField r = round_metric();
  const MetricField f = add_one_form(r, OneFormField::rotation(Vec3(0, 0, 1), 0.3));
  const Vec3 x(1, 0, 0), v(0, 1, 0.2);
  EXPECT_NEAR(scale_field(1.7, r)(x, v), 1.7 * r(x, v), 1e-14);
  EXPECT_NEAR(ht_volume_density(scale_field(1.7, r), x), 1.7 * 1.7, 1e-7);
  EXPECT_NEAR(reverse_field(f)(x, v), f(x, -v), 1e-14);
  EXPECT_NEAR(central_symmetrization_field(f)(x, v), r(x, v), 1e-14);
  EXPECT_NEAR(average_field(f, reverse_field(f))(x, v), r(x, v), 1e-14);
}

TEST(MetricField, CentralSymmetrizationIncreasesDensity) {
  const MetricField f = funk_ball(2);
  const MetricField s = central_symmetrization_field(f);
  const Vec3 x(0.4, 0.1, 0.0);
  EXPECT_GE(ht_volume_density(s, x), ht_volume_density(f, x) - 1e-9);
}

TEST(MetricField, ArealSymmetrizationIn3DKeepsAreaDensity) {
  const MetricField f = randers_chart(3, Eigen::Matrix3d::Identity(), OneFormField::constant(Vec3(0.3, 0, 0.2)));
  const MetricField b = areal_symmetrization_field(f);
  const Vec3 x(0.1, 0.2, 0.3);
  const std::vector<Vec3> frame = {Vec3::UnitX(), Vec3::UnitY()};
  // b carries a polytope fiber built on the codisc grid, so projections
  // agree only to the grid's second-order error.
  EXPECT_NEAR(k_area_density(b, x, frame), k_area_density(f, x, frame), 5e-3);
  EXPECT_TRUE(b.is_reversible());
}

TEST(MetricField, KAreaDensities) {
  const MetricField r = round_metric();
  const Vec3 x(0, 0, 1);
  const std::vector<Vec3> a = {Vec3(2, 0, 0)};
  EXPECT_NEAR(k_area_density(r, x, a), 2.0, 1e-12);
  const std::vector<Vec3> frame = {Vec3::UnitX(), Vec3::UnitY()};
  EXPECT_NEAR(k_area_density(euclidean_field(3), Vec3::Zero(), frame), 1.0, 1e-3);
}

TEST(MetricField, CurveAndSurfaceAreas) {
  const MetricField r = round_metric();
  ParametrizedCurve eq;
  eq.point = [](double t) { return Vec3(std::cos(t), std::sin(t), 0.0); };
  eq.t1 = 2 * kPi;
  eq.closed = true;
  EXPECT_NEAR(hypersurface_area(r, eq), 2 * kPi, 1e-9);
  ParametrizedSurface sq;
  sq.point = [](double s, double t) { return Vec3(s, t, 0.5 * s); };
  EXPECT_NEAR(hypersurface_area(euclidean_field(3), sq), std::sqrt(1.25), 5e-3);
}

TEST(MetricField, ChartMembership) {
  const MetricField f = funk_ball(2);
  EXPECT_TRUE(f.contains(Vec3(0.5, 0.5, 0)));
  EXPECT_FALSE(f.contains(Vec3(0.9, 0.9, 0)));
  EXPECT_THROW(ht_volume_density(f, Vec3(2, 0, 0)), InputError);
  for (const Vec3& p : sample_base_points(f, 30)) EXPECT_TRUE(f.contains(p));
}

TEST(OneForm, ExactLinearOnSphereIsTangential) {
  const OneFormField b = OneFormField::exact_linear(true, Vec3(0, 0, 0.2));
  const Vec3 x = Vec3(0.3, 0.4, 0.5).normalized();
  EXPECT_NEAR(b.covector(x).dot(x), 0.0, 1e-15);
  EXPECT_TRUE(b.has_potential());
  EXPECT_NEAR(b.potential(x), 0.2 * x.z(), 1e-15);
  EXPECT_NEAR(b.negated()(x, Vec3(0, 0, 1)), -b(x, Vec3(0, 0, 1)), 1e-15);
}
