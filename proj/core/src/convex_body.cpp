#include "finsler/convex_body.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "finsler/error.hpp"

namespace finsler {

struct ConvexBody::State {
  int dim = 0;
  SupportFn support;
  std::optional<Polytope> exact_polytope;
  std::string family;
  int grid_level = 3;

  mutable std::once_flag once;
  mutable std::optional<Polytope> sampled_polytope;
};

namespace {

void check_dim(int dim) {
  if (dim != 2 && dim != 3) throw InputError("ConvexBody: dimension must be 2 or 3");
}

// Exact planar Minkowski sum: hull of pairwise vertex sums.
Polytope polygon_sum(const Polytope& a, const Polytope& b) {
  std::vector<Vec3> points;
  points.reserve(a.vertices().size() * b.vertices().size());
  for (const auto& p : a.vertices()) {
    for (const auto& q : b.vertices()) points.push_back(p + q);
  }
  return Polytope::from_vertices(2, points);
}

}  // namespace

const ConvexBody::State& ConvexBody::state() const {
  if (!state_) throw InputError("ConvexBody: empty body");
  return *state_;
}

ConvexBody ConvexBody::from_support(int dim, SupportFn support, std::string family,
                                    int grid_level) {
  check_dim(dim);
  if (!support) throw InputError("ConvexBody::from_support: null support function");
  auto s = std::make_shared<State>();
  s->dim = dim;
  s->support = std::move(support);
  s->family = std::move(family);
  s->grid_level = grid_level;
  return ConvexBody(std::move(s));
}

ConvexBody ConvexBody::from_polytope(Polytope polytope, std::string family) {
  check_dim(polytope.dim());
  if (polytope.empty()) throw InputError("ConvexBody::from_polytope: empty polytope");
  auto s = std::make_shared<State>();
  s->dim = polytope.dim();
  s->exact_polytope = std::move(polytope);
  s->family = std::move(family);
  return ConvexBody(std::move(s));
}

ConvexBody ConvexBody::from_vertices(int dim, std::span<const Vec3> vertices) {
  return from_polytope(Polytope::from_vertices(dim, vertices), "polytope");
}

ConvexBody ConvexBody::from_samples(int dim, int grid_level, std::span<const double> support) {
  const DirectionGrid& grid = sphere_grid(dim, grid_level);
  if (support.size() != grid.size()) {
    throw InputError("ConvexBody::from_samples: expected " + std::to_string(grid.size()) +
                     " support samples, got " + std::to_string(support.size()));
  }
  auto s = std::make_shared<State>();
  s->dim = dim;
  s->exact_polytope = Polytope::from_halfspaces(dim, grid.nodes, support);
  s->family = "sampled";
  s->grid_level = grid_level;
  return ConvexBody(std::move(s));
}

ConvexBody ConvexBody::ball(int dim, double radius, const Vec3& center) {
  if (!(radius > 0.0)) throw InputError("ConvexBody::ball: radius must be positive");
  return from_support(
      dim, [radius, center](const Vec3& u) { return radius * u.norm() + center.dot(u); },
      "ball");
}

ConvexBody ConvexBody::ellipsoid(int dim, const Vec3& semi_axes) {
  for (int i = 0; i < dim; ++i) {
    if (!(semi_axes[i] > 0.0)) throw InputError("ConvexBody::ellipsoid: axes must be positive");
  }
  const Vec3 a2 = semi_axes.cwiseProduct(semi_axes);
  return from_support(
      dim, [a2](const Vec3& u) { return std::sqrt(a2.dot(u.cwiseProduct(u))); }, "ellipsoid");
}

ConvexBody ConvexBody::box(int dim, const Vec3& half_widths) {
  std::vector<Vec3> corners;
  const int count = 1 << dim;
  for (int mask = 0; mask < count; ++mask) {
    Vec3 c = Vec3::Zero();
    for (int i = 0; i < dim; ++i) c[i] = (mask & (1 << i)) ? half_widths[i] : -half_widths[i];
    corners.push_back(c);
  }
  return from_polytope(Polytope::from_vertices(dim, corners), "box");
}

int ConvexBody::dim() const { return state().dim; }

bool ConvexBody::is_polytope() const { return state().exact_polytope.has_value(); }

bool ConvexBody::has_exact_support() const { return static_cast<bool>(state().support); }

const std::string& ConvexBody::family() const { return state().family; }

int ConvexBody::grid_level() const { return state().grid_level; }

double ConvexBody::support(const Vec3& u) const {
  const State& s = state();
  if (s.support) return s.support(u);
  return s.exact_polytope->support(u);
}

const Polytope& ConvexBody::polytope() const {
  const State& s = state();
  if (s.exact_polytope) return *s.exact_polytope;
  std::call_once(s.once, [&s] {
    const DirectionGrid& grid = sphere_grid(s.dim, s.grid_level);
    std::vector<double> h(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) h[i] = s.support(grid.nodes[i]);
    s.sampled_polytope = Polytope::from_halfspaces(s.dim, grid.nodes, h);
  });
  return *s.sampled_polytope;
}

std::vector<double> ConvexBody::support_samples() const {
  const DirectionGrid& grid = sphere_grid(dim(), grid_level());
  std::vector<double> h(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) h[i] = support(grid.nodes[i]);
  return h;
}

ConvexBody ConvexBody::translated(const Vec3& t) const {
  if (is_polytope()) {
    auto out = from_polytope(polytope().translated(t), family());
    return out;
  }
  auto inner = state_;
  return from_support(
      dim(), [inner, t](const Vec3& u) { return inner->support(u) + t.dot(u); },
      family() + "+translate", grid_level());
}

ConvexBody ConvexBody::scaled(double c) const {
  if (!(c > 0.0)) throw InputError("ConvexBody::scaled: factor must be positive");
  if (is_polytope()) return from_polytope(polytope().scaled(c), family());
  auto inner = state_;
  return from_support(
      dim(), [inner, c](const Vec3& u) { return c * inner->support(u); }, family() + "*scale",
      grid_level());
}

ConvexBody ConvexBody::reflected() const {
  if (is_polytope()) {
    std::vector<Vec3> pts;
    for (const auto& v : polytope().vertices()) pts.push_back(-v);
    return from_polytope(Polytope::from_vertices(dim(), pts), family());
  }
  auto inner = state_;
  return from_support(
      dim(), [inner](const Vec3& u) { return inner->support(-u); }, family() + "-reflect",
      grid_level());
}

double radial(const ConvexBody& body, const Vec3& u) {
  if (body.is_polytope()) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& f : body.polytope().facets()) {
      if (f.offset <= 0.0) throw InputError("radial: origin is not interior");
      const double c = f.normal.dot(u);
      if (c > 0.0) best = std::min(best, f.offset / c);
    }
    return best;
  }
  double gauge = 0.0;
  if (body.dim() == 2) {
    gauge = maximize_on_circle(
                [&](double t) {
                  const Vec3 w(std::cos(t), std::sin(t), 0.0);
                  return u.dot(w) / body.support(w);
                },
                256)
                .value;
  } else {
    gauge = maximize_on_sphere([&](const Vec3& w) { return u.dot(w) / body.support(w); }, 2)
                .value;
  }
  if (!(gauge > 0.0)) throw InputError("radial: origin is not interior");
  return 1.0 / gauge;
}

ConvexBody polar(const ConvexBody& body) {
  const int n = body.dim();
  if (body.is_polytope()) {
    const Polytope& p = body.polytope();
    for (const auto& f : p.facets()) {
      if (f.offset <= 1e-12) throw InputError("polar: origin is not interior");
    }
    std::vector<Vec3> normals;
    std::vector<double> offsets;
    for (const auto& v : p.vertices()) {
      normals.push_back(v.normalized());
      offsets.push_back(1.0 / v.norm());
    }
    return ConvexBody::from_polytope(Polytope::from_halfspaces(n, normals, offsets), "polar");
  }
  const DirectionGrid& grid = sphere_grid(n, std::min(body.grid_level(), 2));
  for (const auto& u : grid.nodes) {
    if (body.support(u) <= 0.0) throw InputError("polar: origin is not interior");
  }
  return ConvexBody::from_support(
      n, [body](const Vec3& u) { return u.norm() == 0.0 ? 0.0 : 1.0 / radial(body, u); },
      "polar(" + body.family() + ")", body.grid_level());
}

ConvexBody minkowski_sum(const ConvexBody& a, const ConvexBody& b) {
  if (a.dim() != b.dim()) throw InputError("minkowski_sum: dimension mismatch");
  if (a.is_polytope() && b.is_polytope()) {
    if (a.dim() == 2) return ConvexBody::from_polytope(polygon_sum(a.polytope(), b.polytope()));
    const auto& va = a.polytope().vertices();
    const auto& vb = b.polytope().vertices();
    if (va.size() * vb.size() <= 4096) {
      std::vector<Vec3> pts;
      for (const auto& p : va) {
        for (const auto& q : vb) pts.push_back(p + q);
      }
      return ConvexBody::from_vertices(3, pts);
    }
  }
  return ConvexBody::from_support(
      a.dim(), [a, b](const Vec3& u) { return a.support(u) + b.support(u); },
      a.family() + "+" + b.family(), std::max(a.grid_level(), b.grid_level()));
}

ConvexBody central_symmetral(const ConvexBody& body) {
  if (body.is_polytope()) {
    const auto& v = body.polytope().vertices();
    if (body.dim() == 2 || v.size() * v.size() <= 4096) {
      std::vector<Vec3> pts;
      pts.reserve(v.size() * v.size());
      for (const auto& p : v) {
        for (const auto& q : v) pts.push_back(0.5 * (p - q));
      }
      return ConvexBody::from_vertices(body.dim(), pts);
    }
  }
  return ConvexBody::from_support(
      body.dim(), [body](const Vec3& u) { return 0.5 * (body.support(u) + body.support(-u)); },
      "symmetral(" + body.family() + ")", body.grid_level());
}

double volume(const ConvexBody& body) {
  if (body.is_polytope()) return body.polytope().volume();
  const int n = body.dim();
  const DirectionGrid& grid = sphere_grid(n, body.grid_level());
  std::vector<double> samples(grid.size());
  if (n == 2) {
    // Area = (1/2) int (h^2 - h'^2) dtheta; h' by a fourth-order stencil.
    const double d = 1e-3;
    auto h = [&](double t) { return body.support(Vec3(std::cos(t), std::sin(t), 0.0)); };
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double t = std::atan2(grid.nodes[i].y(), grid.nodes[i].x());
      const double hv = h(t);
      const double dh = (-h(t + 2 * d) + 8 * h(t + d) - 8 * h(t - d) + h(t - 2 * d)) / (12 * d);
      samples[i] = 0.5 * (hv * hv - dh * dh);
    }
    return integrate_sphere_samples(grid, samples);
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = radial(body, grid.nodes[i]);
    samples[i] = r * r * r / 3.0;
  }
  return integrate_sphere_samples(grid, samples);
}

double brightness(const ConvexBody& body, const Vec3& u) {
  if (std::abs(u.norm() - 1.0) > 1e-9) throw InputError("brightness: direction is not unit");
  CompensatedSum s;
  for (const auto& f : body.polytope().facets()) s.add(std::abs(u.dot(f.normal)) * f.area);
  return 0.5 * s.value();
}

double projection_area_k(const ConvexBody& body, std::span<const Vec3> frame) {
  const int n = body.dim();
  const int k = static_cast<int>(frame.size());
  if (k < 1 || k > n) throw InputError("projection_area_k: need 1 <= k <= n");
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (std::abs(frame[i].dot(frame[j]) - (i == j ? 1.0 : 0.0)) > 1e-9) {
        throw InputError("projection_area_k: frame is not orthonormal");
      }
    }
  }
  if (k == n) return volume(body);
  if (k == 1) return body.support(frame[0]) + body.support(-frame[0]);
  // k = 2 inside R^3.
  const Vec3 e1 = frame[0];
  const Vec3 e2 = frame[1];
  if (body.is_polytope()) {
    std::vector<Vec3> pts;
    for (const auto& v : body.polytope().vertices()) pts.emplace_back(v.dot(e1), v.dot(e2), 0.0);
    return hull_area_2d(pts);
  }
  auto shadow = ConvexBody::from_support(
      2, [body, e1, e2](const Vec3& u) { return body.support(u.x() * e1 + u.y() * e2); },
      "shadow", body.grid_level());
  return volume(shadow);
}

std::vector<SurfaceElement> surface_area_measure(const ConvexBody& body) {
  const Polytope& p = body.polytope();
  if (p.facets().size() < static_cast<std::size_t>(p.dim() + 1) || !(p.volume() > 0.0)) {
    throw InputError("surface_area_measure: degenerate (lower-dimensional) body");
  }
  std::vector<SurfaceElement> out;
  for (const auto& f : p.facets()) out.push_back({f.normal, f.area});
  return out;
}

Vec3 steiner_point(const ConvexBody& body) {
  const int n = body.dim();
  const DirectionGrid& grid = sphere_grid(n, n == 2 ? 6 : 5);
  Vec3 acc = Vec3::Zero();
  for (int c = 0; c < n; ++c) {
    acc[c] = integrate_sphere(grid, [&](const Vec3& u) { return body.support(u) * u[c]; });
  }
  return acc * (n / sphere_area(n));
}

BlaschkeResult blaschke_body(const ConvexBody& body, const MinkowskiOptions& options) {
  if (body.dim() == 2) return {central_symmetral(body), 0, 0.0, {}};
  const auto measure = surface_area_measure(body);
  // Pair facet normals into antipodal classes and average their areas.
  const double cos_tol = std::cos(1e-6);
  std::vector<Vec3> normals;
  std::vector<double> areas;
  std::vector<bool> used(measure.size(), false);
  for (std::size_t i = 0; i < measure.size(); ++i) {
    if (used[i]) continue;
    used[i] = true;
    double opposite = 0.0;
    for (std::size_t j = i + 1; j < measure.size(); ++j) {
      if (!used[j] && measure[i].normal.dot(measure[j].normal) < -cos_tol) {
        opposite += measure[j].area;
        used[j] = true;
      }
    }
    const double a = 0.5 * (measure[i].area + opposite);
    normals.push_back(measure[i].normal);
    areas.push_back(a);
    normals.push_back(-measure[i].normal);
    areas.push_back(a);
  }
  auto sol = solve_minkowski_problem(normals, areas, options);
  // The target is even, so the solution is centrally symmetric about a point
  // c with h_j - h_{j'} = 2 c . u_j; c is its Steiner point.
  Eigen::Matrix3d lhs = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  for (std::size_t j = 0; j + 1 < normals.size(); j += 2) {
    const double d = 0.5 * (sol.polytope.support(normals[j]) - sol.polytope.support(normals[j + 1]));
    lhs += normals[j] * normals[j].transpose();
    rhs += d * normals[j];
  }
  const Vec3 center = lhs.ldlt().solve(rhs);
  Polytope centered = sol.polytope.translated(-center);
  return {ConvexBody::from_polytope(std::move(centered), "blaschke"), sol.iterations,
          sol.max_rel_error, std::move(sol.residual_history)};
}

}  // namespace finsler
