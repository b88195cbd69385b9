#pragma once

#include <functional>
#include <string>

#include "finsler/convex_body.hpp"
#include "finsler/numerics.hpp"

namespace finsler {

/// One fiber norm F on R^2 or R^3 (planar vectors keep z = 0). F is
/// positively 1-homogeneous and positive off 0, not necessarily symmetric.
class MinkowskiNorm {
 public:
  using Fn = std::function<double(const Vec3&)>;
  using GradFn = std::function<Vec3(const Vec3&)>;

  MinkowskiNorm() = default;
  MinkowskiNorm(int dim, Fn f, std::string family, GradFn gradient = {},
                bool claims_strong_convexity = true);

  static MinkowskiNorm euclidean(int dim);
  /// |v| + b . v, requires |b| < 1.
  static MinkowskiNorm randers(int dim, const Vec3& b);
  /// |v_1| + ... + |v_n|; convex but not strongly convex.
  static MinkowskiNorm l1(int dim);
  /// F = h_K, so the unit ball of F is the polar of K.
  static MinkowskiNorm support_of(const ConvexBody& body);
  static MinkowskiNorm custom(int dim, Fn f, std::string name = "custom");

  double operator()(const Vec3& v) const { return f_(v); }
  int dim() const noexcept { return dim_; }
  const std::string& family() const noexcept { return family_; }
  bool has_gradient() const noexcept { return static_cast<bool>(grad_); }
  bool claims_strong_convexity() const noexcept { return strongly_convex_; }
  const Fn& function() const noexcept { return f_; }

  /// Fiber derivative dF/dv, analytic when available, else central differences.
  Vec3 gradient(const Vec3& v) const;

  MinkowskiNorm reversed() const;
  MinkowskiNorm scaled(double c) const;
  /// F + beta, beta a linear form.
  MinkowskiNorm plus_linear(const Vec3& beta) const;

 private:
  int dim_ = 0;
  Fn f_;
  std::string family_;
  GradFn grad_;
  bool strongly_convex_ = true;
};

/// F*(xi) = max{xi . v : F(v) = 1} together with the maximizing unit-F vector.
struct DualResult {
  double value = 0.0;
  Vec3 argmax = Vec3::Zero();
};

DualResult dual_norm_with_argmax(const MinkowskiNorm& norm, const Vec3& xi);
double dual_norm(const MinkowskiNorm& norm, const Vec3& xi);

/// Dual norm F* as a MinkowskiNorm of its own.
MinkowskiNorm dual(const MinkowskiNorm& norm);

/// dF/dv at v; satisfies xi . v = F(v) and F*(xi) = 1.
Vec3 legendre(const MinkowskiNorm& norm, const Vec3& v);

struct OddEvenSplit {
  std::function<double(const Vec3&)> odd;
  MinkowskiNorm even;
};

/// F = F_odd + F_even with F_odd(v) = (F(v) - F(-v))/2, F_even(v) = (F(v) + F(-v))/2.
OddEvenSplit odd_even_split(const MinkowskiNorm& norm);

struct LinearFit {
  Vec3 beta = Vec3::Zero();
  double residual = 0.0;  ///< weighted RMS of f - beta
};

/// Weighted least-squares fit of a linear form to samples of f on the grid.
LinearFit linear_fit_residual(const DirectionGrid& grid, std::span<const double> samples);
LinearFit linear_fit_residual(const DirectionGrid& grid,
                              const std::function<double(const Vec3&)>& f);

/// Co-disc of the norm, the polar of its unit ball. Its support function is F.
ConvexBody codisc(const MinkowskiNorm& norm, int grid_level = 3);

/// Unit ball {v : F(v) <= 1}, support F*.
ConvexBody unit_ball(const MinkowskiNorm& norm, int grid_level = 3);

struct ConvexityReport {
  double min_eigenvalue = 0.0;
  Vec3 worst_direction = Vec3::Zero();
  bool strongly_convex = false;
};

/// Smallest eigenvalue of the finite-difference Hessian of F^2 over
/// `samples` quasi-random unit vectors.
ConvexityReport check_strong_convexity(const MinkowskiNorm& norm, int samples = 200,
                                       double threshold = 1e-8);

/// Deterministic quasi-uniform unit vectors (golden-angle spiral in 3D,
/// equally spaced with an irrational offset in 2D).
std::vector<Vec3> quasi_random_directions(int dim, int count);

}  // namespace finsler
