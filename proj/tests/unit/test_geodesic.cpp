#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "finsler/crofton.hpp"
#include "finsler/error.hpp"
#include "finsler/geodesic.hpp"
#include "support.hpp"

using namespace finsler;

TEST(Geodesic, RoundGreatCircleClosesAfterTwoPi) {
  const auto tr = geodesic_trace(round_metric(), Vec3(1, 0, 0), Vec3(0, 1, 0.3), 2 * kPi);
  EXPECT_NEAR((tr.states.back().x - Vec3(1, 0, 0)).norm(), 0.0, 1e-7);
  EXPECT_LT(tr.max_energy_drift, 1e-8);
  EXPECT_LT(tr.max_speed_error, 1e-8);
  EXPECT_LT(tr.max_sphere_error, 1e-12);
  EXPECT_GT(tr.recenterings, 0);
  EXPECT_EQ(tr.states.size(), 257u);
}

TEST(Geodesic, RoundQuarterTurnHitsClosedForm) {
  const auto tr = geodesic_trace(round_metric(), Vec3(1, 0, 0), Vec3(0, 0, 2), kPi / 2);
  EXPECT_NEAR((tr.states.back().x - Vec3(0, 0, 1)).norm(), 0.0, 1e-8);
  EXPECT_NEAR((tr.states.back().v - Vec3(-1, 0, 0)).norm(), 0.0, 1e-7);
}

TEST(Geodesic, BusemannGeodesicsAreGreatCircles) {
  const MetricField b = busemann_metric(perturbed_round_density(Vec3(0, 0, 1), 0.5, 0.2));
  std::mt19937_64 rng(31);
  for (int i = 0; i < 3; ++i) {
    const Vec3 x = test::random_unit(rng);
    const Vec3 v = test::random_tangent(rng, x);
    const Vec3 pole = x.cross(v).normalized();
    TraceOptions opt;
    opt.samples = 64;
    const auto tr = geodesic_trace(b, x, v, 2 * kPi, opt);
    for (const auto& s : tr.states) EXPECT_LT(std::abs(s.x.dot(pole)), 1e-5);
    EXPECT_LT(tr.max_energy_drift, 1e-6);
  }
}

TEST(Geodesic, FunkGeodesicsAreStraightAndStopAtBoundary) {
  const MetricField f = funk_ball(2);
  const Vec3 x(0.1, 0.2, 0.0), d = Vec3(0.6, -0.3, 0.0).normalized();
  const auto tr = geodesic_trace(f, x, d, 3.0);
  for (const auto& s : tr.states) {
    const Vec3 r = s.x - x;
    EXPECT_LT((r - r.dot(d) * d).norm(), 1e-6);
  }
  // Forward Funk distance to the boundary is infinite, but the chart guard
  // stops long traces.
  const auto far = geodesic_trace(f, x, d, 40.0);
  EXPECT_TRUE(far.hit_boundary);
  EXPECT_LT(far.states.back().x.norm(), 1.0);
}

TEST(Geodesic, BackwardTraceRetracesForwardTrace) {
  const MetricField f = randers_sphere(OneFormField::rotation(Vec3(0, 0, 1), 0.3));
  const Vec3 x(1, 0, 0), v(0, 1, 0.4);
  const auto fwd = geodesic_trace(f, x, v, 1.0);
  const auto end = fwd.states.back();
  const auto back = geodesic_trace(f, end.x, end.v, -1.0);
  EXPECT_NEAR((back.states.back().x - x).norm(), 0.0, 1e-7);
  EXPECT_NEAR(back.states.back().t, -1.0, 1e-15);
}

TEST(Geodesic, RejectsBadInputs) {
  EXPECT_THROW(geodesic_trace(round_metric(), Vec3(1, 0, 0), Vec3(2, 0, 0), 1.0), InputError);
  EXPECT_THROW(geodesic_trace(funk_ball(2), Vec3(2, 0, 0), Vec3(0, 1, 0), 1.0), InputError);
  EXPECT_THROW(geodesic_trace(euclidean_field(3), Vec3(0, 0, 0), Vec3(0, 1, 0), 1.0), InputError);
}

TEST(Geodesic, HilbertFormPairsToF) {
  const MetricField f = funk_ball(2);
  const Vec3 x(0.3, 0.1, 0), v(0.2, 0.5, 0);
  EXPECT_NEAR(hilbert_form(f, x, v).dot(v), f(x, v), 1e-10);
}

TEST(Reversibility, RoundPassesRotationalRandersFails) {
  const std::vector<std::pair<Vec3, Vec3>> s = {{Vec3(1, 0, 0), Vec3(0, 1, 0.3)},
                                                {Vec3(0, 0.6, 0.8), Vec3(1, 0, 0)}};
  EXPECT_TRUE(reversibility_check(round_metric(), s, 1.0).pass());
  const auto r = reversibility_check(randers_sphere(OneFormField::rotation(Vec3(0, 0, 1), 0.3)), s, 1.0);
  EXPECT_EQ(r.verdict, Verdict::Fail);
  EXPECT_GT(r.residuals.at("max_distance"), 1e-2);
}

TEST(Reversibility, ExactFormKeepsGeodesicsReversible) {
  const MetricField f = randers_sphere(OneFormField::exact_linear(true, Vec3(0, 0, 0.2)));
  const std::vector<std::pair<Vec3, Vec3>> s = {{Vec3(1, 0, 0), Vec3(0, 1, 0.3)}};
  EXPECT_TRUE(reversibility_check(f, s, 1.0).pass());
}

TEST(Patch, MeridianOmegaMatchesSinOracle) {
  const auto patch = TransversalPatch::meridian();
  const PatchForm pf = section_symplectic_form(round_metric(), patch);
  for (int i = 0; i < pf.n1; ++i) {
    for (int j = 0; j < pf.n2; ++j) {
      const double s2 = patch.s2_lo + j * (patch.s2_hi - patch.s2_lo) / (pf.n2 - 1);
      EXPECT_NEAR(std::abs(pf.omega[i * pf.n2 + j]), std::sin(s2), 1e-6);
    }
  }
  EXPECT_GT(pf.min_margin, 1e-3);
}

TEST(Patch, TangentDirectionsAreNotTransversal) {
  TransversalPatch p;
  p.state = [](double s1, double) -> std::pair<Vec3, Vec3> {
    const Vec3 x(std::cos(s1), std::sin(s1), 0);
    return {x, Vec3(-std::sin(s1), std::cos(s1), 0)};
  };
  p.n1 = p.n2 = 6;
  EXPECT_THROW(section_symplectic_form(round_metric(), p), InputError);
}

TEST(Patch, FlowPreservesOmega) {
  const MetricField b = busemann_metric(perturbed_round_density(Vec3(0, 0, 1), 0.5, 0.2));
  // The fourth-order stencils need about 20 nodes per side for 1e-4.
  const SampledPatch p = sample_patch(b, TransversalPatch::meridian(0.3, 0.6, 1.2, 20));
  const PatchForm w0 = section_symplectic_form(b, p);
  const PatchForm w1 = section_symplectic_form(b, flow_patch(b, p, 0.7));
  for (std::size_t k = 0; k < w0.omega.size(); ++k) {
    EXPECT_NEAR(w1.omega[k], w0.omega[k], 1e-4 * std::abs(w0.omega[k]));
  }
}

TEST(MotionRatio, ScaledMetricGivesConstantRatio) {
  const MetricField r = round_metric();
  const SampledPatch p = sample_patch(r, TransversalPatch::meridian(0.3, 0.6, 1.2, 10));
  const MotionRatio m = motion_integral_ratio(r, scale_field(1.7, r), p);
  for (double nu : m.nu) EXPECT_NEAR(nu, 1.7, 1e-4);
  const MotionRatio e = motion_integral_ratio(
      r, add_one_form(r, OneFormField::exact_linear(true, Vec3(0, 0, 0.2))), p);
  for (double nu : e.nu) EXPECT_NEAR(nu, 1.0, 1e-5);
}

TEST(MotionRatio, AlongFlowSpreadConvergesWithPatchResolution) {
  const MetricField r = round_metric();
  const MetricField b = busemann_metric(perturbed_round_density(Vec3(0, 0, 1), 0.5, 0.2));
  double prev = 1e300;
  for (int n : {8, 16, 30}) {
    const SampledPatch p = sample_patch(r, TransversalPatch::meridian(0.3, 0.6, 1.2, n));
    const double s = motion_integral_ratio_along_flow(r, b, p, {0.35, 0.7}).flow_spread;
    EXPECT_LT(s, prev);
    prev = s;
  }
  EXPECT_LT(prev, 1e-4);
}

TEST(Santalo, RoundClosedForms) {
  const CheckReport r = santalo_check(round_metric());
  EXPECT_NEAR(*r.lhs, 8 * kPi * kPi, 1e-4);
  EXPECT_NEAR(*r.rhs, 8 * kPi * kPi, 8 * kPi * kPi * 1e-2);
  EXPECT_TRUE(r.pass());
  EXPECT_THROW(santalo_check(randers_sphere(OneFormField::rotation(Vec3(0, 0, 1), 0.3))), InputError);
  EXPECT_THROW(santalo_check(funk_ball(2)), InputError);
}

TEST(Crofton, AreaCheckOnBump) {
  const MetricField b = busemann_metric(perturbed_round_density(Vec3(0, 0, 1), 0.5, 0.2));
  EXPECT_TRUE(crofton_area_check(b, SphereCurve::latitude(40).curve).pass());
}

TEST(PrimeGeodesic, PolynomialDensityLength) {
  const MetricField b = busemann_metric(CroftonDensity::poly({{0.25, 0, 0, 0}, {0.125, 0, 0, 2}}));
  EXPECT_NEAR(prime_geodesic_length(b), 7 * kPi / 3, 1e-3);
}
