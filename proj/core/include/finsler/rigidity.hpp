#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "finsler/check_report.hpp"
#include "finsler/convex_body.hpp"
#include "finsler/crofton.hpp"
#include "finsler/metric_field.hpp"

namespace finsler {

/// Best linear form fitted to the odd part of the fiber at x, as an ambient
/// covector, together with the weighted RMS fit residual.
struct PointFit {
  Vec3 beta = Vec3::Zero();
  double residual = 0.0;
};

PointFit fit_odd_part(const MetricField& field, const Vec3& x);

/// max over the nodes of |loop integral of beta| / loop area, for square
/// coordinate loops of the given side centred at each node (gnomonic
/// coordinates on S^2, every coordinate plane on a 3D chart).
double closedness_residual(const OneFormField& beta, const std::vector<Vec3>& nodes,
                           int chart_dim = 2, double side = 1e-3);

struct ReversiblePlusClosedOptions {
  std::vector<Vec3> nodes;  ///< empty: level-1 sphere grid, or a 5x5 chart lattice
  double loop_side = 1e-3;
  double linearity_tol = 1e-6;
  double closedness_tol = 1e-4;
};

struct ReversiblePlusClosed {
  MetricField reversible;  ///< F - beta
  OneFormField beta;       ///< fitted pointwise on demand
  std::vector<Vec3> nodes;
  std::vector<double> linearity;  ///< per node
  double max_linearity = 0.0;
  double closedness = 0.0;
  CheckReport report;
};

/// Splits F = F_rev + beta with beta the pointwise linear fit of the odd part
/// of F, and measures how linear the odd part is and how closed beta is.
ReversiblePlusClosed detect_reversible_plus_closed(const MetricField& field,
                                                   const ReversiblePlusClosedOptions& options = {});

/// Default base nodes of a field: sphere_grid(3, 1) on S^2, a 5x5 (or
/// 3x3x3) lattice inside the chart otherwise.
std::vector<Vec3> default_nodes(const MetricField& field);

struct PotentialOptions {
  double closedness_budget = 1e-3;
  int loops = 50;
  std::uint64_t seed = 1;
  double chart_radius = 0.5;  ///< charts: audit triangles inside this ball around z
  int order = 24;             ///< Gauss-Legendre order per path
};

struct PotentialRecovery {
  std::vector<double> values;  ///< f at the requested points, f(z) = 0
  double max_loop_residual = 0.0;
};

/// f(x) = integral of beta from z to x: great-circle arcs on S^2, straight
/// segments on charts. Path independence is audited on random triangles;
/// the loop residual is |loop integral| / enclosed area.
PotentialRecovery recover_potential(const OneFormField& beta, const Vec3& z,
                                    const std::vector<Vec3>& points,
                                    const PotentialOptions& options = {});

/// Line integral of beta along the shorter great-circle arc (S^2) or the
/// segment (charts) from a to b.
double path_integral(const OneFormField& beta, const Vec3& a, const Vec3& b, int order = 24);

/// d(x, y) - d(y, x) against 2 (P(y) - P(x)) for a field F_rev + dP on S^2
/// whose geodesics are great circles. Distances are F-lengths of the
/// shorter arcs.
CheckReport distance_asymmetry_audit(const MetricField& field,
                                     const std::function<double(const Vec3&)>& potential,
                                     int pairs = 20, std::uint64_t seed = 7, double tol = 1e-4);

/// l from the Crofton count of a great circle, V from the HT volume; checks
/// V = l^2 / pi and that V 2 pi / l^2 rounds to 2.
CheckReport zoll_volume_check(const MetricField& field, int grid_level = 3, double tol = 1e-2,
                              double integer_tol = 0.05);

struct DensityRigidityOptions {
  int node_level = 1;  ///< nodes compared: sphere_grid(3, node_level)
  int volume_level = 3;
  double length_tol = 1e-3;
  double volume_tol = 1e-2;
  double density_tol = 1e-6;
  double linearity_tol = 1e-6;
  double closedness_tol = 1e-4;
};

/// Whether f2 - f1 is an exact form: compares great-circle lengths, total
/// volumes and nodal HT densities, the Brunn-Minkowski excess of the average
/// field, and the linearity and closedness of f2 - f1. Passes iff every
/// comparison is within tolerance.
CheckReport ht_density_rigidity_check(const MetricField& f1, const MetricField& f2,
                                      const DensityRigidityOptions& options = {});

/// Width, brightness and centre tests of K against the symmetric gauge B in
/// R^3. Passes iff K is a translate of a dilate of B.
CheckReport chakerian_check(const ConvexBody& body, const ConvexBody& gauge, double tol = 1e-5,
                            int grid_level = 2);

struct SymmetrizationGap {
  double volume = 0.0;
  double symmetral_volume = 0.0;
  double relative_gap = 0.0;  ///< (vol(Delta K) - vol(K)) / vol(K)
};

SymmetrizationGap symmetrization_gap(const ConvexBody& body);

struct CorpusBody {
  ConvexBody body;
  bool symmetric = false;  ///< origin-symmetric up to translation
  std::string name;
};

/// Planar strongly convex bodies h = 1 + sum c_k cos(k t - phi_k) + t . u.
/// Every other body only carries even modes (symmetric up to translation).
std::vector<CorpusBody> brunn_minkowski_corpus(int count = 50, std::uint64_t seed = 11);

/// Revolving the width-w Reuleaux triangle about its symmetry axis (z)
/// gives a body of constant width w.
ConvexBody rotated_reuleaux(double width = 1.0, int grid_level = 4);

/// Regular tetrahedron with circumradius 1, centroid at the origin.
ConvexBody regular_tetrahedron();

/// Non-symmetric polytope whose surface-area measure is a discretization of
/// (1 + eps P3(u_z)) du with the linear part projected out. The odd part
/// drops out of the Cauchy formula, so its brightness is that of the
/// polytope with the plain grid weights as facet areas, a discrete ball.
ConvexBody constant_brightness_body(double eps = 0.9, int level = 3,
                                    const MinkowskiOptions& options = {});

}  // namespace finsler
