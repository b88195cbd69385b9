#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace finsler {

/// All geometry lives in R^3; planar objects keep a zero third coordinate.
using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = 3.14159265358979323846;

/// Unit-ball volume in dimension n (eps_1 = 2, eps_2 = pi, eps_3 = 4 pi / 3).
double unit_ball_volume(int n);

/// Surface measure of S^{n-1}.
double sphere_area(int n);

/// Quadrature on S^1 or S^2. Nodes are unit vectors; for every node its
/// antipode is also a node and carries the same weight.
struct DirectionGrid {
  int dim = 0;
  int level = 0;
  std::vector<Vec3> nodes;
  std::vector<double> weights;
  std::vector<std::size_t> antipode;

  std::size_t size() const noexcept { return nodes.size(); }
};

/// n = 2: 2^(level+6) equally spaced angles. n = 3: level-times subdivided
/// icosahedron with spherical-Voronoi weights, antipodally symmetrized.
DirectionGrid build_sphere_grid(int n, int level);

/// Cached, immutable copy of build_sphere_grid(n, level).
const DirectionGrid& sphere_grid(int n, int level);

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept;
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double compensated_sum(std::span<const double> xs);

/// sum_i w_i f(u_i) in node order; throws InputError on a non-finite sample.
double integrate_sphere(const DirectionGrid& grid, const std::function<double(const Vec3&)>& f);

/// Same reduction, with f already sampled on the nodes.
double integrate_sphere_samples(const DirectionGrid& grid, std::span<const double> samples);

/// Orthonormal frame (e1, e2) of the plane orthogonal to the unit vector x.
/// e1 comes from the smallest-index coordinate axis not parallel to x.
std::pair<Vec3, Vec3> tangent_frame(const Vec3& x);

/// Trapezoid rule over k equally spaced points of the great circle with
/// pole x.
double integrate_circle_on_sphere(const Vec3& x, const std::function<double(const Vec3&)>& f,
                                  int k);

/// Central difference (g(v + h w) - g(v - h w)) / 2h. A non-positive h
/// selects 1e-5 * max(1, |v|).
double directional_derivative(const std::function<double(const Vec3&)>& g, const Vec3& v,
                              const Vec3& w, double h = 0.0);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

const GaussRule& gauss_legendre(int order);

/// Integral of f over [a, b] with an order-point Gauss-Legendre rule.
double gauss_integrate(const std::function<double(double)>& f, double a, double b, int order);

/// Adaptive Gauss-Kronrod integral to relative tolerance tol.
double adaptive_integrate(const std::function<double(double)>& f, double a, double b,
                          double tol = 1e-10);

/// Location and value of a maximum of a 2pi-periodic function: grid seed
/// over `seeds` angles, then Brent refinement to ~1e-8 rad in angle.
struct AngleMax {
  double angle = 0.0;
  double value = 0.0;
};

AngleMax maximize_on_circle(const std::function<double(double)>& f, int seeds = 256);

/// Maximum of f over S^2: grid seed on a level-`level` grid, then a
/// shrinking pattern search in the tangent plane of the incumbent.
struct SphereMax {
  Vec3 direction = Vec3::Zero();
  double value = 0.0;
};

SphereMax maximize_on_sphere(const std::function<double(const Vec3&)>& f, int level = 2,
                             double angle_tol = 1e-9);

/// Evaluates body(i) for i in [0, n) using up to `jobs` threads. Results are
/// stored by index so that subsequent reductions keep the node order.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body);

/// Global default thread count used by quadrature-heavy operations.
int default_jobs();
void set_default_jobs(int jobs);

}  // namespace finsler
