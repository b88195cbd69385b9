#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "finsler/numerics.hpp"

namespace finsler {

/// Facet of a polytope in R^2 (an edge) or R^3 (a convex polygon).
struct Facet {
  Vec3 normal = Vec3::Zero();  ///< outward unit normal
  double offset = 0.0;         ///< normal . x for x on the facet
  double area = 0.0;           ///< (n-1)-dimensional measure
  std::vector<std::size_t> vertices;  ///< cyclic order, counter-clockwise seen from outside
};

/// The facet of one input halfspace after intersecting with all others.
/// For n = 3, `edge_planes[k]` is the halfspace that cut the edge from
/// polygon[k] to polygon[k+1]; for n = 2, the halfspaces bounding each end.
struct HalfspaceCell {
  std::vector<Vec3> polygon;
  std::vector<int> edge_planes;
  double area = 0.0;
};

/// Intersects {x : normals[i] . x <= offsets[i]} facet by facet. The result is
/// indexed like the input; redundant halfspaces get an empty cell. Throws
/// InputError when the intersection is unbounded or empty.
std::vector<HalfspaceCell> clip_halfspaces(int dim, std::span<const Vec3> normals,
                                           std::span<const double> offsets);

/// Bounded convex polytope in R^2 or R^3 with explicit vertices and facets.
class Polytope {
 public:
  Polytope() = default;

  static Polytope from_halfspaces(int dim, std::span<const Vec3> normals,
                                  std::span<const double> offsets);
  static Polytope from_vertices(int dim, std::span<const Vec3> points);

  int dim() const noexcept { return dim_; }
  const std::vector<Vec3>& vertices() const noexcept { return vertices_; }
  const std::vector<Facet>& facets() const noexcept { return facets_; }
  bool empty() const noexcept { return vertices_.empty(); }

  double support(const Vec3& u) const;
  double volume() const;
  double surface_area() const;
  Vec3 vertex_centroid() const;

  /// Sum_i A_i n_i; zero for any closed polytope.
  Vec3 closure_defect() const;

  Polytope translated(const Vec3& t) const;
  Polytope scaled(double c) const;

 private:
  int dim_ = 0;
  std::vector<Vec3> vertices_;
  std::vector<Facet> facets_;
};

/// Convex hull of planar points (third coordinate ignored), counter-clockwise,
/// collinear points removed.
std::vector<Vec3> convex_hull_2d(std::span<const Vec3> points);

/// Area of the planar convex hull of the points.
double hull_area_2d(std::span<const Vec3> points);

}  // namespace finsler
