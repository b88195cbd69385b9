#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "finsler/numerics.hpp"
#include "finsler/polytope.hpp"

namespace finsler {

/// Convex body in R^2 or R^3.
///
/// A body is carried either by an exact support function (analytic families
/// such as balls, ellipsoids and fiber norms) or by a polytope. Sampled
/// support data is converted to a polytope on construction by intersecting
/// the halfspaces {x : x . u_i <= h(u_i)}. Exact bodies are converted lazily,
/// on the direction grid of their `grid_level`, when an operation needs
/// facets. Values are immutable and cheap to copy.
class ConvexBody {
 public:
  using SupportFn = std::function<double(const Vec3&)>;

  ConvexBody() = default;

  static ConvexBody from_support(int dim, SupportFn support, std::string family,
                                 int grid_level = 3);
  static ConvexBody from_polytope(Polytope polytope, std::string family = "polytope");
  static ConvexBody from_vertices(int dim, std::span<const Vec3> vertices);
  static ConvexBody from_samples(int dim, int grid_level, std::span<const double> support);

  static ConvexBody ball(int dim, double radius = 1.0, const Vec3& center = Vec3::Zero());
  /// {x : sum (x_i / a_i)^2 <= 1}.
  static ConvexBody ellipsoid(int dim, const Vec3& semi_axes);
  /// [-a_1, a_1] x ... x [-a_n, a_n].
  static ConvexBody box(int dim, const Vec3& half_widths);

  int dim() const;
  bool is_polytope() const;
  bool has_exact_support() const;
  const std::string& family() const;
  int grid_level() const;

  /// Positively 1-homogeneous support function h(u) = max_{x in K} x . u.
  double support(const Vec3& u) const;

  /// Exact polytope, or the halfspace polytope of the support samples on
  /// the body's direction grid.
  const Polytope& polytope() const;

  /// Support samples on the body's own direction grid.
  std::vector<double> support_samples() const;

  ConvexBody translated(const Vec3& t) const;
  ConvexBody scaled(double c) const;
  ConvexBody reflected() const;

 private:
  struct State;
  std::shared_ptr<const State> state_;

  explicit ConvexBody(std::shared_ptr<const State> state) : state_(std::move(state)) {}
  const State& state() const;
};

/// Radial function rho(u) = sup{t : t u in K}; requires the origin interior.
double radial(const ConvexBody& body, const Vec3& u);

/// Polar body {y : y . x <= 1 for all x in K}.
ConvexBody polar(const ConvexBody& body);

/// Support functions add.
ConvexBody minkowski_sum(const ConvexBody& a, const ConvexBody& b);

/// (K - K) / 2, support (h(u) + h(-u)) / 2.
ConvexBody central_symmetral(const ConvexBody& body);

/// Exact for polytopes. For exact planar bodies, (1/2) int (h^2 - h'^2); for
/// exact bodies in R^3, (1/3) int rho^3 over the sphere grid.
double volume(const ConvexBody& body);

/// Cauchy projection formula (1/2) sum |u . n_i| A_i on the polytope. In R^3
/// this is the area of the shadow on the plane u^perp; in R^2 it is the
/// length of the shadow on the line u^perp.
double brightness(const ConvexBody& body, const Vec3& u);

/// Volume of the orthogonal projection onto span(frame), frame orthonormal.
double projection_area_k(const ConvexBody& body, std::span<const Vec3> frame);

struct SurfaceElement {
  Vec3 normal;
  double area;
};

std::vector<SurfaceElement> surface_area_measure(const ConvexBody& body);

/// Steiner point (n / |S^{n-1}|) int h(u) u du on a fine grid.
Vec3 steiner_point(const ConvexBody& body);

struct MinkowskiOptions {
  double rel_tol = 1e-4;
  int max_iterations = 5000;
};

struct MinkowskiSolution {
  Polytope polytope;
  int iterations = 0;
  double max_rel_error = 0.0;
  std::vector<double> residual_history;
};

/// Polytope with the given facet normals and areas, Steiner point at the
/// origin. The data must be closed (sum a_j u_j = 0) and not coplanar.
/// Throws ConvergenceError with the residual history on failure.
MinkowskiSolution solve_minkowski_problem(std::span<const Vec3> normals,
                                          std::span<const double> areas,
                                          const MinkowskiOptions& options = {});

struct BlaschkeResult {
  ConvexBody body;
  int iterations = 0;
  double max_rel_error = 0.0;
  std::vector<double> residual_history;
};

/// Origin-symmetric body with the same brightness function. In R^2 this is
/// the central symmetral.
BlaschkeResult blaschke_body(const ConvexBody& body, const MinkowskiOptions& options = {});

}  // namespace finsler
