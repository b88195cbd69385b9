#include "finsler/norms.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "finsler/error.hpp"

namespace finsler {

namespace {

void check_dim(int dim) {
  if (dim != 2 && dim != 3) throw InputError("MinkowskiNorm: dimension must be 2 or 3");
}

// Fourth-order central difference of a scalar function along w.
double stencil(const std::function<double(const Vec3&)>& f, const Vec3& v, const Vec3& w,
               double h) {
  return (-f(v + 2 * h * w) + 8 * f(v + h * w) - 8 * f(v - h * w) + f(v - 2 * h * w)) /
         (12 * h);
}

}  // namespace

MinkowskiNorm::MinkowskiNorm(int dim, Fn f, std::string family, GradFn gradient,
                             bool claims_strong_convexity)
    : dim_(dim),
      f_(std::move(f)),
      family_(std::move(family)),
      grad_(std::move(gradient)),
      strongly_convex_(claims_strong_convexity) {
  check_dim(dim);
  if (!f_) throw InputError("MinkowskiNorm: null evaluator");
}

MinkowskiNorm MinkowskiNorm::euclidean(int dim) {
  return MinkowskiNorm(
      dim, [](const Vec3& v) { return v.norm(); }, "euclidean",
      [](const Vec3& v) -> Vec3 { return v.normalized(); });
}

MinkowskiNorm MinkowskiNorm::randers(int dim, const Vec3& b) {
  if (!(b.norm() < 1.0)) throw InputError("MinkowskiNorm::randers: need |b| < 1");
  Vec3 bb = b;
  if (dim == 2) bb.z() = 0.0;
  return MinkowskiNorm(
      dim, [bb](const Vec3& v) { return v.norm() + bb.dot(v); }, "randers",
      [bb](const Vec3& v) -> Vec3 { return v.normalized() + bb; });
}

MinkowskiNorm MinkowskiNorm::l1(int dim) {
  return MinkowskiNorm(
      dim, [](const Vec3& v) { return v.cwiseAbs().sum(); }, "l1", {}, false);
}

MinkowskiNorm MinkowskiNorm::support_of(const ConvexBody& body) {
  return MinkowskiNorm(
      body.dim(), [body](const Vec3& v) { return body.support(v); }, "support-of-body", {},
      !body.is_polytope());
}

MinkowskiNorm MinkowskiNorm::custom(int dim, Fn f, std::string name) {
  return MinkowskiNorm(dim, std::move(f), std::move(name));
}

Vec3 MinkowskiNorm::gradient(const Vec3& v) const {
  if (grad_) {
    Vec3 g = grad_(v);
    if (dim_ == 2) g.z() = 0.0;
    return g;
  }
  const double scale = v.norm();
  const Vec3 u = v / scale;
  Vec3 g = Vec3::Zero();
  for (int i = 0; i < dim_; ++i) g[i] = stencil(f_, u, Vec3::Unit(i), 1e-3);
  return g;
}

MinkowskiNorm MinkowskiNorm::reversed() const {
  auto f = f_;
  GradFn g;
  if (grad_) {
    auto inner = grad_;
    g = [inner](const Vec3& v) -> Vec3 { return -inner(-v); };
  }
  return MinkowskiNorm(
      dim_, [f](const Vec3& v) { return f(-v); }, family_ + "-reversed", g, strongly_convex_);
}

MinkowskiNorm MinkowskiNorm::scaled(double c) const {
  if (!(c > 0.0)) throw InputError("MinkowskiNorm::scaled: factor must be positive");
  auto f = f_;
  GradFn g;
  if (grad_) {
    auto inner = grad_;
    g = [inner, c](const Vec3& v) -> Vec3 { return c * inner(v); };
  }
  return MinkowskiNorm(
      dim_, [f, c](const Vec3& v) { return c * f(v); }, family_ + "-scaled", g,
      strongly_convex_);
}

MinkowskiNorm MinkowskiNorm::plus_linear(const Vec3& beta) const {
  auto f = f_;
  GradFn g;
  if (grad_) {
    auto inner = grad_;
    g = [inner, beta](const Vec3& v) -> Vec3 { return inner(v) + beta; };
  }
  return MinkowskiNorm(
      dim_, [f, beta](const Vec3& v) { return f(v) + beta.dot(v); }, family_ + "+linear", g,
      strongly_convex_);
}

DualResult dual_norm_with_argmax(const MinkowskiNorm& norm, const Vec3& xi) {
  DualResult r;
  if (norm.dim() == 2) {
    auto ratio = [&](double t) {
      const Vec3 w(std::cos(t), std::sin(t), 0.0);
      return xi.dot(w) / norm(w);
    };
    const AngleMax m = maximize_on_circle(ratio, 256);
    const Vec3 w(std::cos(m.angle), std::sin(m.angle), 0.0);
    r.value = m.value;
    r.argmax = w / norm(w);
  } else {
    const SphereMax m =
        maximize_on_sphere([&](const Vec3& w) { return xi.dot(w) / norm(w); }, 2, 1e-9);
    r.value = m.value;
    r.argmax = m.direction / norm(m.direction);
  }
  if (!std::isfinite(r.value)) throw ConvergenceError("dual_norm: non-finite maximum");
  return r;
}

double dual_norm(const MinkowskiNorm& norm, const Vec3& xi) {
  return dual_norm_with_argmax(norm, xi).value;
}

MinkowskiNorm dual(const MinkowskiNorm& norm) {
  return MinkowskiNorm(
      norm.dim(), [norm](const Vec3& xi) { return dual_norm(norm, xi); },
      "dual(" + norm.family() + ")", {}, norm.claims_strong_convexity());
}

Vec3 legendre(const MinkowskiNorm& norm, const Vec3& v) {
  if (v.norm() == 0.0) throw InputError("legendre: zero vector");
  if (!norm.claims_strong_convexity()) {
    throw InputError("legendre: norm is not strongly convex (" + norm.family() + ")");
  }
  return norm.gradient(v);
}

OddEvenSplit odd_even_split(const MinkowskiNorm& norm) {
  auto f = norm.function();
  OddEvenSplit s;
  s.odd = [f](const Vec3& v) { return 0.5 * (f(v) - f(-v)); };
  s.even = MinkowskiNorm(
      norm.dim(), [f](const Vec3& v) { return 0.5 * (f(v) + f(-v)); },
      "even(" + norm.family() + ")", {}, norm.claims_strong_convexity());
  return s;
}

LinearFit linear_fit_residual(const DirectionGrid& grid, std::span<const double> samples) {
  const int n = grid.dim;
  if (samples.size() != grid.size()) throw InputError("linear_fit_residual: size mismatch");
  if (grid.size() < static_cast<std::size_t>(n)) {
    throw InputError("linear_fit_residual: fewer samples than the dimension");
  }
  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Eigen::VectorXd u = grid.nodes[i].head(n);
    normal += grid.weights[i] * u * u.transpose();
    rhs += grid.weights[i] * samples[i] * u;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(normal);
  if (lu.rank() < n) throw InputError("linear_fit_residual: underdetermined system");
  const Eigen::VectorXd b = lu.solve(rhs);
  LinearFit fit;
  fit.beta.head(n) = b;
  std::vector<double> sq(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double e = samples[i] - fit.beta.dot(grid.nodes[i]);
    sq[i] = e * e;
  }
  double total = 0.0;
  for (double w : grid.weights) total += w;
  fit.residual = std::sqrt(std::max(0.0, integrate_sphere_samples(grid, sq)) / total);
  return fit;
}

LinearFit linear_fit_residual(const DirectionGrid& grid,
                              const std::function<double(const Vec3&)>& f) {
  std::vector<double> s(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) s[i] = f(grid.nodes[i]);
  return linear_fit_residual(grid, s);
}

ConvexBody codisc(const MinkowskiNorm& norm, int grid_level) {
  return ConvexBody::from_support(norm.dim(), norm.function(), "codisc(" + norm.family() + ")",
                                  grid_level);
}

ConvexBody unit_ball(const MinkowskiNorm& norm, int grid_level) {
  return ConvexBody::from_support(
      norm.dim(), [norm](const Vec3& xi) { return dual_norm(norm, xi); },
      "unit_ball(" + norm.family() + ")", grid_level);
}

std::vector<Vec3> quasi_random_directions(int dim, int count) {
  check_dim(dim);
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(count));
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int i = 0; i < count; ++i) {
    if (dim == 2) {
      const double t = 2 * kPi * std::fmod(0.1234 + i * golden, 1.0);
      out.emplace_back(std::cos(t), std::sin(t), 0.0);
    } else {
      const double z = 1.0 - (2.0 * i + 1.0) / count;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = 2 * kPi * std::fmod(i * golden, 1.0);
      out.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
    }
  }
  return out;
}

ConvexityReport check_strong_convexity(const MinkowskiNorm& norm, int samples,
                                       double threshold) {
  const int n = norm.dim();
  const double h = 1e-3;
  auto g = [&](const Vec3& v) {
    const double f = norm(v);
    return f * f;
  };
  ConvexityReport rep;
  rep.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (const Vec3& v : quasi_random_directions(n, samples)) {
    Eigen::MatrixXd H(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        const Vec3 a = h * Vec3::Unit(i);
        const Vec3 b = h * Vec3::Unit(j);
        const double d = (g(v + a + b) - g(v + a - b) - g(v - a + b) + g(v - a - b)) / (4 * h * h);
        H(i, j) = d;
        H(j, i) = d;
      }
    }
    const double lo = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H).eigenvalues().minCoeff();
    if (lo < rep.min_eigenvalue) {
      rep.min_eigenvalue = lo;
      rep.worst_direction = v;
    }
  }
  rep.strongly_convex = rep.min_eigenvalue > threshold;
  return rep;
}

}  // namespace finsler
