#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "finsler/metric_field.hpp"
#include "finsler/numerics.hpp"

namespace finsler {

/// Positive density m on oriented poles p in S^2; the great circle with pole
/// p is {x : x . p = 0}. m = 1/4 everywhere reproduces the round metric.
class CroftonDensity {
 public:
  using Fn = std::function<double(const Vec3&)>;

  CroftonDensity() = default;
  CroftonDensity(Fn m, nlohmann::json description);

  static CroftonDensity constant(double value);
  /// sum_t c_t x^i y^j z^k over terms {c, i, j, k}.
  static CroftonDensity poly(const std::vector<std::array<double, 4>>& terms);
  static CroftonDensity sum(const CroftonDensity& a, const CroftonDensity& b);
  static CroftonDensity scaled(double c, const CroftonDensity& d);

  double operator()(const Vec3& p) const { return m_(p); }
  const Fn& function() const noexcept { return m_; }
  const nlohmann::json& description() const noexcept { return description_; }

  /// Largest |m(p) - m(-p)| over the nodes of a level-`level` grid.
  double evenness_defect(int level = 3) const;
  double min_value(int level = 3) const;
  /// int_{S^2} m dsigma on a level-`level` grid.
  double total_mass(int level = 5) const;

 private:
  Fn m_;
  nlohmann::json description_;
};

/// (1/4)(1 + a exp(-(1 - (p . q)^2) / s^2)): round away from the band of
/// great circles whose pole is near +-q. Requires a > -1, s > 0.
CroftonDensity perturbed_round_density(const Vec3& q, double amplitude, double width);

/// Sphere field F(x, v) = int_{p . x = 0} |p . v| m(p) dl(p).
MetricField busemann_metric(const CroftonDensity& m);

struct SphereCurve {
  ParametrizedCurve curve;

  static SphereCurve equator();
  static SphereCurve latitude(double degrees);
  static SphereCurve great_circle(const Vec3& pole);
  /// Shorter great-circle arc from a to b.
  static SphereCurve arc(const Vec3& a, const Vec3& b);
  /// "equator", "latitude:60", "great_circle:nx,ny,nz".
  static SphereCurve named(const std::string& name);
};

struct CroftonLength {
  double length = 0.0;
  std::size_t poles = 0;
  std::size_t crossings = 0;
  std::vector<std::string> warnings;  ///< suspected tangencies
};

/// sum_i w_i m(p_i) #{t : gamma(t) . p_i = 0} over the oriented poles of a
/// level-`grid_level` grid, rotated to a fixed generic orientation.
CroftonLength crofton_length(const CroftonDensity& m, const ParametrizedCurve& curve,
                             int grid_level = 5, int samples = 4096);

/// The fixed rotation applied to counting grids.
Eigen::Matrix3d counting_rotation();

}  // namespace finsler
