#include <gtest/gtest.h>

#include "finsler/error.hpp"
#include "finsler/polytope.hpp"

using namespace finsler;

namespace {

Polytope cube(double a) {
  std::vector<Vec3> n, v;
  std::vector<double> h;
  for (int i = 0; i < 3; ++i) {
    for (double s : {-1.0, 1.0}) {
      Vec3 e = Vec3::Zero();
      e[i] = s;
      n.push_back(e);
      h.push_back(a);
    }
  }
  return Polytope::from_halfspaces(3, n, h);
}

}  // namespace

TEST(Polytope, CubeFromHalfspaces) {
  const Polytope c = cube(0.5);
  EXPECT_EQ(c.vertices().size(), 8u);
  EXPECT_EQ(c.facets().size(), 6u);
  EXPECT_NEAR(c.volume(), 1.0, 1e-13);
  EXPECT_NEAR(c.surface_area(), 6.0, 1e-13);
  EXPECT_NEAR(c.closure_defect().norm(), 0.0, 1e-13);
  EXPECT_NEAR(c.support(Vec3(1, 1, 1)), 1.5, 1e-13);
}

TEST(Polytope, HullOfRandomPointsContainsThem) {
  std::vector<Vec3> pts;
  for (int i = 0; i < 60; ++i) pts.emplace_back(std::sin(i * 1.3), std::cos(i * 2.1), std::sin(i * 0.7 + 1));
  const Polytope p = Polytope::from_vertices(3, pts);
  for (const Vec3& x : pts) {
    for (const Facet& f : p.facets()) EXPECT_LE(f.normal.dot(x), f.offset + 1e-12);
  }
  EXPECT_NEAR(p.closure_defect().norm(), 0.0, 1e-12);
}

TEST(Polytope, TranslationAndScaling) {
  const Polytope c = cube(1.0);
  EXPECT_NEAR(c.translated(Vec3(3, 0, 0)).volume(), 8.0, 1e-12);
  EXPECT_NEAR(c.scaled(0.5).volume(), 1.0, 1e-12);
}

TEST(Polytope, RedundantHalfspaceGetsEmptyCell) {
  std::vector<Vec3> n = {Vec3::UnitX(), -Vec3::UnitX(), Vec3::UnitY(), -Vec3::UnitY(), Vec3::UnitX()};
  std::vector<double> h = {1, 1, 1, 1, 5};
  const auto cells = clip_halfspaces(2, n, h);
  EXPECT_NEAR(cells[4].area, 0.0, 1e-15);
  EXPECT_NEAR(cells[0].area, 2.0, 1e-14);
}

TEST(Polytope, UnboundedIntersectionThrows) {
  std::vector<Vec3> n = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  std::vector<double> h = {1, 1, 1};
  EXPECT_THROW(Polytope::from_halfspaces(3, n, h), InputError);
}

TEST(Polytope, PlanarHull) {
  std::vector<Vec3> pts = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0), Vec3(0.5, 0.5, 0),
                           Vec3(0.5, 0, 0)};
  EXPECT_EQ(convex_hull_2d(pts).size(), 4u);
  EXPECT_NEAR(hull_area_2d(pts), 1.0, 1e-15);
}
