#include "finsler/numerics.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <thread>
#include <tuple>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include "finsler/error.hpp"

namespace finsler {

namespace {

std::atomic<int> g_jobs{1};

struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
};

Mesh icosahedron() {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  Mesh mesh;
  for (double s1 : {-1.0, 1.0}) {
    for (double s2 : {-1.0, 1.0}) {
      mesh.vertices.emplace_back(0.0, s1, s2 * phi);
      mesh.vertices.emplace_back(s1, s2 * phi, 0.0);
      mesh.vertices.emplace_back(s2 * phi, 0.0, s1);
    }
  }
  // Faces are the triples of mutually adjacent vertices (edge length 2).
  const int n = static_cast<int>(mesh.vertices.size());
  auto adjacent = [&](int a, int b) {
    return std::abs((mesh.vertices[a] - mesh.vertices[b]).norm() - 2.0) < 1e-9;
  };
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (!adjacent(a, b)) continue;
      for (int c = b + 1; c < n; ++c) {
        if (!adjacent(a, c) || !adjacent(b, c)) continue;
        const Vec3& pa = mesh.vertices[a];
        const Vec3 normal = (mesh.vertices[b] - pa).cross(mesh.vertices[c] - pa);
        if (normal.dot(pa) > 0.0) {
          mesh.faces.push_back({a, b, c});
        } else {
          mesh.faces.push_back({a, c, b});
        }
      }
    }
  }
  for (auto& v : mesh.vertices) v.normalize();
  return mesh;
}

Mesh subdivide(const Mesh& in) {
  Mesh out;
  out.vertices = in.vertices;
  std::map<std::pair<int, int>, int> midpoint;
  auto mid = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    const int id = static_cast<int>(out.vertices.size());
    out.vertices.push_back((in.vertices[key.first] + in.vertices[key.second]).normalized());
    midpoint.emplace(key, id);
    return id;
  };
  for (const auto& f : in.faces) {
    const int ab = mid(f[0], f[1]);
    const int bc = mid(f[1], f[2]);
    const int ca = mid(f[2], f[0]);
    out.faces.push_back({f[0], ab, ca});
    out.faces.push_back({f[1], bc, ab});
    out.faces.push_back({f[2], ca, bc});
    out.faces.push_back({ab, bc, ca});
  }
  return out;
}

// Area of the spherical triangle with unit vertices a, b, c.
double spherical_triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double num = std::abs(a.dot(b.cross(c)));
  const double den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
  return 2.0 * std::atan2(num, den);
}

std::vector<double> voronoi_areas(const Mesh& mesh) {
  const std::size_t n = mesh.vertices.size();
  std::vector<Vec3> centers;
  centers.reserve(mesh.faces.size());
  for (const auto& f : mesh.faces) {
    const Vec3& a = mesh.vertices[f[0]];
    const Vec3& b = mesh.vertices[f[1]];
    const Vec3& c = mesh.vertices[f[2]];
    Vec3 cc = (b - a).cross(c - a).normalized();
    if (cc.dot(a + b + c) < 0.0) cc = -cc;
    centers.push_back(cc);
  }
  std::vector<std::vector<int>> incident(n);
  for (std::size_t fi = 0; fi < mesh.faces.size(); ++fi) {
    for (int v : mesh.faces[fi]) incident[v].push_back(static_cast<int>(fi));
  }
  std::vector<double> areas(n, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    const Vec3& p = mesh.vertices[v];
    const auto [e1, e2] = tangent_frame(p);
    auto& ring = incident[v];
    std::sort(ring.begin(), ring.end(), [&](int f1, int f2) {
      return std::atan2(centers[f1].dot(e2), centers[f1].dot(e1)) <
             std::atan2(centers[f2].dot(e2), centers[f2].dot(e1));
    });
    CompensatedSum area;
    for (std::size_t k = 0; k < ring.size(); ++k) {
      area.add(spherical_triangle_area(p, centers[ring[k]], centers[ring[(k + 1) % ring.size()]]));
    }
    areas[v] = area.value();
  }
  return areas;
}

std::vector<std::size_t> antipode_map(const std::vector<Vec3>& nodes) {
  using Key = std::tuple<long long, long long, long long>;
  auto key = [](const Vec3& u) {
    return Key{std::llround(u.x() * 1e9), std::llround(u.y() * 1e9), std::llround(u.z() * 1e9)};
  };
  std::map<Key, std::size_t> index;
  for (std::size_t i = 0; i < nodes.size(); ++i) index.emplace(key(nodes[i]), i);
  std::vector<std::size_t> anti(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    auto it = index.find(key(-nodes[i]));
    if (it == index.end()) throw Error("sphere grid is not antipodally symmetric");
    anti[i] = it->second;
  }
  return anti;
}

}  // namespace

double unit_ball_volume(int n) {
  switch (n) {
    case 1: return 2.0;
    case 2: return kPi;
    case 3: return 4.0 * kPi / 3.0;
    default: throw InputError("unit_ball_volume: unsupported dimension " + std::to_string(n));
  }
}

double sphere_area(int n) {
  switch (n) {
    case 2: return 2.0 * kPi;
    case 3: return 4.0 * kPi;
    default: throw InputError("sphere_area: unsupported dimension " + std::to_string(n));
  }
}

DirectionGrid build_sphere_grid(int n, int level) {
  if (level < 0) throw InputError("build_sphere_grid: negative level");
  DirectionGrid grid;
  grid.dim = n;
  grid.level = level;
  if (n == 2) {
    const std::size_t count = std::size_t{1} << (level + 6);
    const double w = 2.0 * kPi / static_cast<double>(count);
    grid.nodes.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
      const double t = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(count);
      grid.nodes.emplace_back(std::cos(t), std::sin(t), 0.0);
    }
    grid.weights.assign(count, w);
    grid.antipode.resize(count);
    for (std::size_t k = 0; k < count; ++k) grid.antipode[k] = (k + count / 2) % count;
    return grid;
  }
  if (n != 3) throw InputError("build_sphere_grid: unsupported dimension " + std::to_string(n));

  Mesh mesh = icosahedron();
  for (int l = 0; l < level; ++l) mesh = subdivide(mesh);
  grid.nodes = mesh.vertices;
  grid.weights = voronoi_areas(mesh);
  grid.antipode = antipode_map(grid.nodes);
  std::vector<double> sym(grid.weights.size());
  for (std::size_t i = 0; i < sym.size(); ++i) {
    sym[i] = 0.5 * (grid.weights[i] + grid.weights[grid.antipode[i]]);
  }
  const double total = compensated_sum(sym);
  for (auto& w : sym) w *= 4.0 * kPi / total;
  grid.weights = std::move(sym);
  return grid;
}

const DirectionGrid& sphere_grid(int n, int level) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<DirectionGrid>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{n, level}];
  if (!slot) slot = std::make_unique<DirectionGrid>(build_sphere_grid(n, level));
  return *slot;
}

void CompensatedSum::add(double x) noexcept {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    comp_ += (sum_ - t) + x;
  } else {
    comp_ += (x - t) + sum_;
  }
  sum_ = t;
}

double compensated_sum(std::span<const double> xs) {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

double integrate_sphere_samples(const DirectionGrid& grid, std::span<const double> samples) {
  if (samples.size() != grid.size()) throw InputError("integrate_sphere: sample count mismatch");
  CompensatedSum s;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(samples[i])) {
      throw InputError("integrate_sphere: non-finite sample at node " + std::to_string(i));
    }
    s.add(grid.weights[i] * samples[i]);
  }
  return s.value();
}

double integrate_sphere(const DirectionGrid& grid, const std::function<double(const Vec3&)>& f) {
  std::vector<double> samples(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) samples[i] = f(grid.nodes[i]);
  return integrate_sphere_samples(grid, samples);
}

std::pair<Vec3, Vec3> tangent_frame(const Vec3& x) {
  const Vec3 n = x.normalized();
  Vec3 axis = Vec3::Zero();
  for (int i = 0; i < 3; ++i) {
    Vec3 e = Vec3::Zero();
    e[i] = 1.0;
    if (std::abs(e.dot(n)) < 0.9) {
      axis = e;
      break;
    }
  }
  const Vec3 e1 = (axis - axis.dot(n) * n).normalized();
  const Vec3 e2 = n.cross(e1);
  return {e1, e2};
}

double integrate_circle_on_sphere(const Vec3& x, const std::function<double(const Vec3&)>& f,
                                  int k) {
  if (k < 8) throw InputError("integrate_circle_on_sphere: need at least 8 nodes");
  if (std::abs(x.norm() - 1.0) > 1e-9) throw InputError("integrate_circle_on_sphere: |x| != 1");
  const auto [e1, e2] = tangent_frame(x);
  const double h = 2.0 * kPi / k;
  CompensatedSum s;
  for (int i = 0; i < k; ++i) {
    const double t = h * i;
    const double value = f(std::cos(t) * e1 + std::sin(t) * e2);
    if (!std::isfinite(value)) throw InputError("integrate_circle_on_sphere: non-finite sample");
    s.add(value);
  }
  return h * s.value();
}

double directional_derivative(const std::function<double(const Vec3&)>& g, const Vec3& v,
                              const Vec3& w, double h) {
  if (h <= 0.0) h = 1e-5 * std::max(1.0, v.norm());
  const double up = g(v + h * w);
  const double down = g(v - h * w);
  if (!std::isfinite(up) || !std::isfinite(down)) {
    throw InputError("directional_derivative: non-finite evaluation");
  }
  return (up - down) / (2.0 * h);
}

const GaussRule& gauss_legendre(int order) {
  if (order < 1) throw InputError("gauss_legendre: order must be positive");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[order];
  if (slot) return *slot;
  auto rule = std::make_unique<GaussRule>();
  rule->nodes.resize(order);
  rule->weights.resize(order);
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0;
      double p2 = 0.0;
      for (int j = 1; j <= order; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      dp = order * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    rule->nodes[i] = -z;
    rule->nodes[order - 1 - i] = z;
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule->weights[i] = w;
    rule->weights[order - 1 - i] = w;
  }
  slot = std::move(rule);
  return *slot;
}

double gauss_integrate(const std::function<double(double)>& f, double a, double b, int order) {
  const GaussRule& rule = gauss_legendre(order);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  CompensatedSum s;
  for (int i = 0; i < order; ++i) s.add(rule.weights[i] * f(mid + half * rule.nodes[i]));
  return half * s.value();
}

double adaptive_integrate(const std::function<double(double)>& f, double a, double b,
                          double tol) {
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, tol, &error);
}

AngleMax maximize_on_circle(const std::function<double(double)>& f, int seeds) {
  const double h = 2.0 * kPi / seeds;
  AngleMax best{0.0, f(0.0)};
  for (int i = 1; i < seeds; ++i) {
    const double t = h * i;
    const double value = f(t);
    if (value > best.value) best = {t, value};
  }
  auto neg = [&](double t) { return -f(t); };
  const auto [t, v] =
      boost::math::tools::brent_find_minima(neg, best.angle - h, best.angle + h, 40);
  if (-v >= best.value) best = {t, -v};
  return best;
}

SphereMax maximize_on_sphere(const std::function<double(const Vec3&)>& f, int level,
                             double angle_tol) {
  const DirectionGrid& grid = sphere_grid(3, level);
  SphereMax best{grid.nodes[0], f(grid.nodes[0])};
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double value = f(grid.nodes[i]);
    if (value > best.value) best = {grid.nodes[i], value};
  }
  double step = 2.0 * std::sqrt(4.0 * kPi / grid.size());
  while (step > angle_tol) {
    const auto [e1, e2] = tangent_frame(best.direction);
    bool moved = false;
    for (int k = 0; k < 8; ++k) {
      const double a = kPi * k / 4.0;
      const Vec3 trial =
          (best.direction + step * (std::cos(a) * e1 + std::sin(a) * e2)).normalized();
      const double value = f(trial);
      if (value > best.value) {
        best = {trial, value};
        moved = true;
        break;
      }
    }
    if (!moved) step *= 0.5;
  }
  return best;
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body) {
  if (jobs <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

int default_jobs() { return g_jobs.load(); }

void set_default_jobs(int jobs) { g_jobs.store(std::max(1, jobs)); }

}  // namespace finsler
