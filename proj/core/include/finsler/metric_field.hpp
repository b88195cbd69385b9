#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <variant>

#include <nlohmann/json.hpp>

#include "finsler/convex_body.hpp"
#include "finsler/norms.hpp"
#include "finsler/numerics.hpp"

namespace finsler {

/// A 1-form on a chart of R^n or on S^2, stored as an ambient covector.
/// On S^2 only the tangential part of the argument is paired.
class OneFormField {
 public:
  using Covector = std::function<Vec3(const Vec3& x)>;
  using Potential = std::function<double(const Vec3& x)>;

  OneFormField() = default;
  OneFormField(bool on_sphere, Covector covector, std::string name, Potential potential = {});

  /// d(g . x): on a chart this is the constant covector g; on S^2 the
  /// differential of the restriction of the linear function g . x.
  static OneFormField exact_linear(bool on_sphere, const Vec3& g);
  /// x -> scale * (axis x x), the dual of a rotation field. Not closed on S^2.
  static OneFormField rotation(const Vec3& axis, double scale);
  /// Constant covector on a chart (closed, exact).
  static OneFormField constant(const Vec3& c);
  static OneFormField zero(bool on_sphere);

  bool on_sphere() const noexcept { return on_sphere_; }
  const std::string& name() const noexcept { return name_; }
  bool has_potential() const noexcept { return static_cast<bool>(potential_); }
  double potential(const Vec3& x) const;

  Vec3 covector(const Vec3& x) const;
  double operator()(const Vec3& x, const Vec3& v) const;

  OneFormField scaled(double c) const;
  OneFormField negated() const { return scaled(-1.0); }

 private:
  bool on_sphere_ = false;
  Covector covector_;
  std::string name_;
  Potential potential_;
};

using FieldFiber = std::function<double(const Vec3& x, const Vec3& v)>;
/// Ambient dF/dv at (x, v).
using FieldFiberGradient = std::function<Vec3(const Vec3& x, const Vec3& v)>;
/// The fiber at x as a norm in chart coordinates (charts) or in the
/// tangent_frame(x) coordinates (sphere). Lets families precompute per point.
using FieldNormFactory = std::function<MinkowskiNorm(const Vec3& x)>;

struct MetricFieldOptions {
  FieldFiberGradient gradient;
  FieldNormFactory norm_factory;
  std::function<bool(const Vec3&)> inside;             ///< chart membership
  std::function<double(const Vec3&)> boundary_margin;  ///< margin to the chart boundary
  std::function<double(const Vec3&)> crofton_density;  ///< Busemann fields only
  double extent = 1.0;                                 ///< chart points have |x_i| <= extent
  nlohmann::json description;
  bool reversible = false;
};

/// Finsler metric on an open chart of R^2 / R^3 or on the unit sphere S^2.
/// Sphere fields take ambient vectors and only see their tangential part.
class MetricField {
 public:
  using Fiber = FieldFiber;
  using FiberGradient = FieldFiberGradient;
  using NormFactory = FieldNormFactory;
  using Options = MetricFieldOptions;

  MetricField() = default;

  static MetricField chart(int dim, Fiber fiber, std::string family, Options options = {});
  static MetricField sphere(Fiber fiber, std::string family, Options options = {});

  bool on_sphere() const;
  /// Manifold dimension: chart dimension, or 2 on the sphere.
  int dim() const;
  const std::string& family() const;
  const nlohmann::json& description() const;
  bool is_reversible() const;

  bool contains(const Vec3& x) const;
  /// Chart half-width bound (1 on the sphere).
  double extent() const;
  /// Margin to the chart boundary, +inf when unknown or on S^2.
  double boundary_margin(const Vec3& x) const;

  double operator()(const Vec3& x, const Vec3& v) const;
  Vec3 gradient(const Vec3& x, const Vec3& v) const;
  MinkowskiNorm norm_at(const Vec3& x) const;

  /// Orthonormal frame in which norm_at(x) is expressed: the chart axes, or
  /// (tangent_frame(x), x) on the sphere.
  std::array<Vec3, 3> frame(const Vec3& x) const;
  /// Ambient vector of frame coordinates u at x.
  Vec3 from_frame(const Vec3& x, const Vec3& u) const;
  /// Frame coordinates of an ambient vector or covector at x.
  Vec3 to_frame(const Vec3& x, const Vec3& w) const;

  /// Crofton density of a Busemann field, empty otherwise.
  const std::function<double(const Vec3&)>& crofton_density() const;
  bool is_busemann() const;

 private:
  struct State;
  std::shared_ptr<const State> state_;
  const State& state() const;
};

MetricField round_metric(double radius = 1.0);
MetricField euclidean_field(int dim, double half_width = 10.0);

/// Funk metric of the open unit ball, closed form.
MetricField funk_ball(int dim = 2);
/// Hilbert metric of the open unit ball, (Funk + reversed Funk)/2.
MetricField hilbert_ball(int dim = 2);

/// Bounded convex domain {x : gauge(x) < 1}; gauge is convex with gauge(0) = 0.
struct ConvexDomain {
  std::function<double(const Vec3&)> gauge;
  double radius = 1.0;  ///< bound on |x| over the domain
  std::string name;
};

ConvexDomain superellipse_domain(double exponent);
ConvexDomain ball_domain();

/// Funk metric F(x, v) = 1 / t*, t* = sup{t : x + t v in domain}, by bisection.
MetricField funk_field(const ConvexDomain& domain, int dim = 2);
MetricField hilbert_field(const ConvexDomain& domain, int dim = 2);

/// sqrt(v^T G v) + beta(x)(v) on a 2D or 3D chart.
MetricField randers_chart(int dim, const Eigen::Matrix3d& g, const OneFormField& beta,
                          double half_width = 10.0);
/// Round metric plus a 1-form on S^2.
MetricField randers_sphere(const OneFormField& beta);

MetricField add_one_form(const MetricField& field, const OneFormField& beta);
MetricField reverse_field(const MetricField& field);
MetricField central_symmetrization_field(const MetricField& field);
MetricField scale_field(double c, const MetricField& field);
/// (F1 + F2) / 2.
MetricField average_field(const MetricField& a, const MetricField& b);
/// Fiberwise Blaschke body of the co-disc. On S^2 and on planar charts this
/// coincides with the central symmetrization.
MetricField areal_symmetrization_field(const MetricField& field,
                                       const MinkowskiOptions& options = {});

/// Dual unit ball of the fiber at x, in the coordinates of field.frame(x).
ConvexBody codisc(const MetricField& field, const Vec3& x, int grid_level = 3);

/// vol(codisc) / eps_n relative to the chart coordinates or the round area form.
double ht_volume_density(const MetricField& field, const Vec3& x, int grid_level = 3);

struct WholeSphere {
  int level = 3;
};
struct BoxRegion {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();
  int order = 16;
};
struct BallRegion {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
  int order = 16;
};
using Region = std::variant<WholeSphere, BoxRegion, BallRegion>;

double ht_volume(const MetricField& field, const Region& region);

/// Node-by-node density on a sphere grid, in node order.
std::vector<double> ht_density_samples(const MetricField& field, const DirectionGrid& grid,
                                       int codisc_level = 3);

/// HT k-area density of the k-vector a_1 ^ ... ^ a_k at x: the volume of the
/// body {(xi(a_1), ..., xi(a_k)) : xi in codisc} divided by eps_k. For an
/// orthonormal frame this is projection_area_k of the co-disc over eps_k.
double k_area_density(const MetricField& field, const Vec3& x, std::span<const Vec3> a,
                      int grid_level = 3);

struct ParametrizedCurve {
  std::function<Vec3(double)> point;
  std::function<Vec3(double)> velocity;  ///< optional; central differences otherwise
  double t0 = 0.0;
  double t1 = 1.0;
  bool closed = false;
  std::string name;

  Vec3 tangent(double t) const;
};

struct ParametrizedSurface {
  std::function<Vec3(double, double)> point;
  double s0 = 0.0, s1 = 1.0, t0 = 0.0, t1 = 1.0;
  int order = 8;
};

/// Curves: int F(gamma, gamma') dt by adaptive Gauss-Kronrod.
double hypersurface_area(const MetricField& field, const ParametrizedCurve& curve,
                         double tol = 1e-10);
/// Surfaces in a 3D chart: int phi_2(d_s p, d_t p) ds dt, tensor Gauss rule.
double hypersurface_area(const MetricField& field, const ParametrizedSurface& surface);

/// Base points used for sampled positivity checks.
std::vector<Vec3> sample_base_points(const MetricField& field, int count);

}  // namespace finsler
