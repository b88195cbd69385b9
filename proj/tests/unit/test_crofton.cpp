#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "finsler/crofton.hpp"
#include "finsler/error.hpp"
#include "support.hpp"

using namespace finsler;

TEST(Busemann, QuarterDensityIsRound) {
  const MetricField b = busemann_metric(CroftonDensity::constant(0.25));
  const MetricField r = round_metric();
  std::mt19937_64 rng(21);
  for (int i = 0; i < 100; ++i) {
    const Vec3 x = test::random_unit(rng);
    const Vec3 v = test::random_tangent(rng, x) * 1.3;
    EXPECT_NEAR(b(x, v), r(x, v), 1e-6);
  }
}

TEST(Busemann, FourierFactoryMatchesPointwiseFiber) {
  const MetricField b = busemann_metric(perturbed_round_density(Vec3(0, 0, 1), 0.5, 0.2));
  std::mt19937_64 rng(22);
  for (int i = 0; i < 10; ++i) {
    const Vec3 x = test::random_unit(rng);
    const MinkowskiNorm n = b.norm_at(x);
    for (const Vec3& u : quasi_random_directions(2, 7)) {
      EXPECT_NEAR(n(u), b(x, b.from_frame(x, u)), 1e-9);
    }
  }
}

TEST(Busemann, GradientIsFiberDerivative) {
  const MetricField b = busemann_metric(CroftonDensity::poly({{0.25, 0, 0, 0}, {0.125, 0, 0, 2}}));
  const Vec3 x = Vec3(0.2, 0.5, 0.7).normalized();
  const auto [e1, e2] = tangent_frame(x);
  const Vec3 v = 0.6 * e1 + 0.3 * e2;
  const Vec3 g = b.gradient(x, v);
  for (const Vec3& e : {e1, e2}) {
    EXPECT_NEAR(g.dot(e), (b(x, v + 1e-6 * e) - b(x, v - 1e-6 * e)) / 2e-6, 1e-6);
  }
}

TEST(Busemann, RejectsOddOrNegativeDensities) {
  EXPECT_THROW(busemann_metric(CroftonDensity::poly({{0.25, 0, 0, 0}, {0.1, 0, 0, 1}})), InputError);
  EXPECT_THROW(busemann_metric(CroftonDensity::poly({{0.25, 0, 0, 0}, {-1.0, 0, 0, 2}})), InputError);
  EXPECT_THROW(perturbed_round_density(Vec3(0, 0, 1), -1.5, 0.2), InputError);
  EXPECT_THROW(perturbed_round_density(Vec3(0, 0, 1), 0.5, 0.0), InputError);
}

TEST(Busemann, QuarterDensityHasUnitHTDensity) {
  const MetricField b = busemann_metric(CroftonDensity::constant(0.25));
  EXPECT_NEAR(ht_volume_density(b, Vec3(0, 0.6, 0.8)), 1.0, 1e-6);
  EXPECT_TRUE(b.is_busemann());
  EXPECT_TRUE(b.is_reversible());
}

TEST(CroftonDensity, PolynomialMassOracle) {
  // int (1/4)(1 + 0.5 z^2) = pi + pi / 6.
  const CroftonDensity m = CroftonDensity::poly({{0.25, 0, 0, 0}, {0.125, 0, 0, 2}});
  EXPECT_NEAR(m.total_mass(), 7.0 * kPi / 6.0, 1e-5);
  EXPECT_NEAR(m.evenness_defect(), 0.0, 1e-16);
  EXPECT_NEAR(m.min_value(), 0.25, 1e-3);
}

TEST(CroftonDensity, Combinators) {
  const CroftonDensity a = CroftonDensity::constant(0.1);
  const CroftonDensity b = CroftonDensity::scaled(2.0, a);
  const Vec3 p(0, 0, 1);
  EXPECT_NEAR(CroftonDensity::sum(a, b)(p), 0.3, 1e-15);
  EXPECT_EQ(b.description()["type"], "scaled");
}

TEST(CroftonLength, EquatorAndLatitude) {
  const CroftonDensity m = CroftonDensity::constant(0.25);
  EXPECT_NEAR(crofton_length(m, SphereCurve::equator().curve).length, 2 * kPi, 2e-2);
  // Latitude 60 degrees has Euclidean length 2 pi cos 60 = pi.
  EXPECT_NEAR(crofton_length(m, SphereCurve::latitude(60).curve).length, kPi, 1e-2 * kPi);
}

TEST(CroftonLength, GreatCircleLengthIsTwiceTheMass) {
  const CroftonDensity m = perturbed_round_density(Vec3(0, 0, 1), 0.5, 0.2);
  const double len = crofton_length(m, SphereCurve::great_circle(Vec3(1, 0.2, 0.3)).curve).length;
  EXPECT_NEAR(len, 2.0 * m.total_mass(), 1e-3 * len);
}

TEST(CroftonLength, AgreesWithFLengthOfArc) {
  const CroftonDensity m = perturbed_round_density(Vec3(0, 0, 1), 0.5, 0.2);
  const MetricField f = busemann_metric(m);
  const SphereCurve arc = SphereCurve::arc(Vec3(1, 0, 0), Vec3(0, 0.6, 0.8));
  const double fl = hypersurface_area(f, arc.curve);
  EXPECT_NEAR(crofton_length(m, arc.curve).length, fl, 1e-2 * fl);
}

TEST(SphereCurve, NamedCurves) {
  EXPECT_NO_THROW(SphereCurve::named("equator"));
  EXPECT_NO_THROW(SphereCurve::named("latitude:30"));
  EXPECT_NO_THROW(SphereCurve::named("great_circle:1,2,3"));
  EXPECT_THROW(SphereCurve::named("spiral"), InputError);
  EXPECT_THROW(SphereCurve::arc(Vec3(1, 0, 0), Vec3(-1, 0, 0)), InputError);
}

TEST(CroftonLength, CountingRotationIsOrthogonal) {
  const Eigen::Matrix3d r = counting_rotation();
  EXPECT_NEAR((r * r.transpose() - Eigen::Matrix3d::Identity()).norm(), 0.0, 1e-14);
  EXPECT_NEAR(r.determinant(), 1.0, 1e-14);
}
