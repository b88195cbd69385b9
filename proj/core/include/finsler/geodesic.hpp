#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "finsler/check_report.hpp"
#include "finsler/crofton.hpp"
#include "finsler/metric_field.hpp"

namespace finsler {

/// Fiber derivative of F at (x, v) as an ambient covector (chart
/// coordinates on a chart). Satisfies xi . v = F(x, v).
Vec3 hilbert_form(const MetricField& field, const Vec3& x, const Vec3& v);

struct GeodesicState {
  double t = 0.0;     ///< metric arclength
  Vec3 x = Vec3::Zero();
  Vec3 v = Vec3::Zero();   ///< unit F-speed velocity
  Vec3 xi = Vec3::Zero();  ///< Hilbert form at (x, v)
  double energy = 0.0;     ///< H = F*(xi)^2 / 2
};

struct GeodesicTrajectory {
  std::vector<GeodesicState> states;
  std::size_t steps = 0;
  std::size_t recenterings = 0;
  double max_energy_drift = 0.0;   ///< max |H - H0| / H0
  double max_speed_error = 0.0;    ///< max |F(x, v) - 1|
  double max_sphere_error = 0.0;   ///< max ||x| - 1| on S^2
  bool hit_boundary = false;       ///< stopped at the chart-boundary guard
};

struct TraceOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  int samples = 256;            ///< output intervals over [0, |T|]
  double recenter_radius = 0.25;  ///< sphere: gnomonic chart radius before re-centering
  double boundary_guard = 1e-6;
};

/// Integrates Hamilton's equations for H = F*^2 / 2 on the unit co-sphere
/// bundle of a surface (S^2 or a planar chart) with an adaptive
/// Dormand-Prince 4/5 method. Negative T traces the same geodesic backwards
/// in time.
GeodesicTrajectory geodesic_trace(const MetricField& field, const Vec3& x0, const Vec3& v0,
                                  double T, const TraceOptions& options = {});

/// Forward trace from (x, v), then a trace from (x_T, -v_T); the residual is
/// the largest distance from the return trace to the forward geodesic.
CheckReport reversibility_check(const MetricField& field,
                                const std::vector<std::pair<Vec3, Vec3>>& samples, double T,
                                double tol = 1e-5, const TraceOptions& options = {});

/// Two-parameter family of states (footpoint, direction) transverse to the
/// geodesic flow. Directions need not be normalized.
struct TransversalPatch {
  std::function<std::pair<Vec3, Vec3>(double, double)> state;
  double s1_lo = 0.0, s1_hi = 1.0;
  double s2_lo = 0.0, s2_hi = 1.0;
  int n1 = 20, n2 = 20;

  /// Footpoints on the meridian x = (cos s1, 0, sin s1); direction at angle
  /// s2 from the meridian tangent towards e2.
  static TransversalPatch meridian(double half_length = 0.3, double dir_lo = 0.6,
                                   double dir_hi = 1.2, int n = 20);
};

/// Patch states on the node grid plus a two-node ghost ring for fourth-order
/// differences. Row-major in s1.
struct SampledPatch {
  int n1 = 0, n2 = 0;
  double h1 = 0.0, h2 = 0.0;
  std::vector<Vec3> x;
  std::vector<Vec3> v;

  int rows() const noexcept { return n1 + 4; }
  int cols() const noexcept { return n2 + 4; }
  std::size_t index(int i, int j) const noexcept {
    return static_cast<std::size_t>((i + 2) * cols() + (j + 2));
  }
};

SampledPatch sample_patch(const MetricField& field, const TransversalPatch& patch);

/// Every node flowed by the geodesic flow of `field` for time t.
SampledPatch flow_patch(const MetricField& field, const SampledPatch& patch, double t,
                        const TraceOptions& options = {});

struct PatchForm {
  int n1 = 0, n2 = 0;
  std::vector<double> omega;  ///< row-major, n1 x n2
  double min_abs = 0.0;
  double max_abs = 0.0;
  double min_margin = 0.0;    ///< |omega| / (|d1 (x, xi)| |d2 (x, xi)|)
};

/// omega = d1 xi . d2 x - d2 xi . d1 x, the pullback of d(alpha) to the patch.
PatchForm section_symplectic_form(const MetricField& field, const SampledPatch& patch,
                                  double min_margin = 1e-3);
PatchForm section_symplectic_form(const MetricField& field, const TransversalPatch& patch,
                                  double min_margin = 1e-3);

struct MotionRatio {
  std::vector<double> nu;  ///< row-major, n1 x n2
  double mean = 0.0;
  double spread = 0.0;       ///< (max - min) / |mean| over the patch
  double flow_spread = 0.0;  ///< max over nodes of (max - min) / |mean| along flow lines
};

/// nu = omega_F2 / omega_F1 nodewise on one patch.
MotionRatio motion_integral_ratio(const MetricField& f1, const MetricField& f2,
                                  const SampledPatch& patch);

/// nu on the patch and on its images under the flow of f1 at the given times.
MotionRatio motion_integral_ratio_along_flow(const MetricField& f1, const MetricField& f2,
                                             const SampledPatch& patch,
                                             const std::vector<double>& times,
                                             const TraceOptions& options = {});

/// LHS = eps_2 2! vol_HT, RHS = l * 4 int m (the omega-mass of the space of
/// geodesics through |omega| = 4 m dsigma).
CheckReport santalo_check(const MetricField& field, int grid_level = 3, double tol = 1e-2);

/// F-length of the curve against (1 / 2 eps_1) int #(gamma n N) |omega|.
CheckReport crofton_area_check(const MetricField& field, const ParametrizedCurve& curve,
                               double tol = 1e-2);

/// Length of a generic great circle by intersection counting.
double prime_geodesic_length(const MetricField& field);

}  // namespace finsler
