#include "finsler/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "finsler/error.hpp"

namespace finsler {

namespace {

struct LoopVertex {
  Vec3 p;
  int tag;  // plane that cut the edge starting at this vertex
};

// Sutherland-Hodgman step: keep {x : n.x <= h}.
std::vector<LoopVertex> clip_loop(const std::vector<LoopVertex>& loop, const Vec3& n, double h,
                                  int plane, double eps) {
  std::vector<LoopVertex> out;
  const std::size_t m = loop.size();
  out.reserve(m + 1);
  for (std::size_t i = 0; i < m; ++i) {
    const LoopVertex& a = loop[i];
    const LoopVertex& b = loop[(i + 1) % m];
    const double da = n.dot(a.p) - h;
    const double db = n.dot(b.p) - h;
    const bool in_a = da <= eps;
    const bool in_b = db <= eps;
    if (in_a) {
      if (in_b) {
        out.push_back(a);
      } else {
        const double t = da / (da - db);
        out.push_back(a);
        out.back().tag = a.tag;
        out.push_back({a.p + t * (b.p - a.p), plane});
      }
    } else if (in_b) {
      const double t = da / (da - db);
      out.push_back({a.p + t * (b.p - a.p), a.tag});
    }
  }
  // Fix tags: an edge entering from outside starts at the intersection point
  // and keeps the tag of the original edge; the edge leaving the halfspace
  // becomes the new cut edge.
  return out;
}

std::vector<LoopVertex> drop_duplicates(std::vector<LoopVertex> loop, double tol) {
  bool changed = true;
  while (changed && loop.size() > 1) {
    changed = false;
    for (std::size_t i = 0; i < loop.size(); ++i) {
      const std::size_t j = (i + 1) % loop.size();
      if ((loop[i].p - loop[j].p).norm() <= tol) {
        // Edge i collapses; vertex i inherits the tag of the surviving edge j.
        loop[i].tag = loop[j].tag;
        loop.erase(loop.begin() + static_cast<std::ptrdiff_t>(j));
        changed = true;
        break;
      }
    }
  }
  return loop;
}

double polygon_area(const std::vector<Vec3>& poly, const Vec3& normal) {
  if (poly.size() < 3) return 0.0;
  Vec3 acc = Vec3::Zero();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    acc += poly[i].cross(poly[(i + 1) % poly.size()]);
  }
  return 0.5 * std::abs(acc.dot(normal));
}

bool parallel_same(const Vec3& a, const Vec3& b) { return a.dot(b) > 1.0 - 1e-12; }

std::vector<HalfspaceCell> clip_3d(std::span<const Vec3> normals, std::span<const double> offsets,
                                   double radius, double scale) {
  const std::size_t n = normals.size();
  const double eps = 1e-13 * scale;
  std::vector<HalfspaceCell> cells(n);
  std::vector<std::size_t> order(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Vec3& nj = normals[j];
    const Vec3 center = offsets[j] * nj;
    const auto [e1, e2] = tangent_frame(nj);
    std::vector<LoopVertex> loop = {{center + radius * (-e1 - e2), -1},
                                    {center + radius * (e1 - e2), -1},
                                    {center + radius * (e1 + e2), -1},
                                    {center + radius * (-e1 + e2), -1}};
    // Nearby normals first: they shrink the polygon fastest.
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return normals[a].dot(nj) > normals[b].dot(nj);
    });
    for (std::size_t k : order) {
      if (k == j) continue;
      const Vec3& nk = normals[k];
      if (parallel_same(nk, nj)) {
        const double gap = offsets[k] - offsets[j];
        if (gap < -eps || (std::abs(gap) <= eps && k < j)) {
          loop.clear();
          break;
        }
        continue;
      }
      bool all_inside = true;
      for (const auto& v : loop) {
        if (nk.dot(v.p) - offsets[k] > eps) {
          all_inside = false;
          break;
        }
      }
      if (all_inside) continue;
      loop = clip_loop(loop, nk, offsets[k], static_cast<int>(k), eps);
      if (loop.size() < 3) {
        loop.clear();
        break;
      }
    }
    loop = drop_duplicates(std::move(loop), 1e-12 * scale);
    if (loop.size() < 3) continue;
    HalfspaceCell& cell = cells[j];
    for (const auto& v : loop) {
      cell.polygon.push_back(v.p);
      cell.edge_planes.push_back(v.tag);
    }
    cell.area = polygon_area(cell.polygon, nj);
    // Orient counter-clockwise seen from outside.
    Vec3 acc = Vec3::Zero();
    for (std::size_t i = 0; i < cell.polygon.size(); ++i) {
      acc += cell.polygon[i].cross(cell.polygon[(i + 1) % cell.polygon.size()]);
    }
    if (acc.dot(nj) < 0.0) {
      std::reverse(cell.polygon.begin(), cell.polygon.end());
      // Edge k now runs polygon[k] -> polygon[k+1] = old edge (m-2-k) reversed.
      std::vector<int> tags(cell.edge_planes.size());
      const std::size_t m = tags.size();
      for (std::size_t k = 0; k < m; ++k) tags[k] = cell.edge_planes[(2 * m - 2 - k) % m];
      cell.edge_planes = std::move(tags);
    }
  }
  return cells;
}

std::vector<HalfspaceCell> clip_2d(std::span<const Vec3> normals, std::span<const double> offsets,
                                   double radius, double scale) {
  const std::size_t n = normals.size();
  const double eps = 1e-13 * scale;
  std::vector<HalfspaceCell> cells(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Vec3& nj = normals[j];
    const Vec3 d(-nj.y(), nj.x(), 0.0);
    const Vec3 base = offsets[j] * nj;
    double lo = -radius;
    double hi = radius;
    int lo_tag = -1;
    int hi_tag = -1;
    bool empty = false;
    for (std::size_t k = 0; k < n && !empty; ++k) {
      if (k == j) continue;
      const Vec3& nk = normals[k];
      const double slope = d.dot(nk);
      const double rhs = offsets[k] - base.dot(nk);
      if (std::abs(slope) < 1e-14) {
        if (parallel_same(nk, nj)) {
          const double gap = offsets[k] - offsets[j];
          if (gap < -eps || (std::abs(gap) <= eps && k < j)) empty = true;
        } else if (rhs < -eps) {
          empty = true;
        }
        continue;
      }
      const double t = rhs / slope;
      if (slope > 0.0) {
        if (t < hi) {
          hi = t;
          hi_tag = static_cast<int>(k);
        }
      } else if (t > lo) {
        lo = t;
        lo_tag = static_cast<int>(k);
      }
    }
    if (empty || hi - lo <= 1e-12 * scale) continue;
    HalfspaceCell& cell = cells[j];
    // Counter-clockwise traversal of the boundary runs along +d.
    cell.polygon = {base + lo * d, base + hi * d};
    cell.edge_planes = {lo_tag, hi_tag};
    cell.area = hi - lo;
  }
  return cells;
}

class VertexPool {
 public:
  explicit VertexPool(double tol) : tol_(tol) {}

  std::size_t insert(const Vec3& p) {
    const auto key = cell_key(p);
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dz = -1; dz <= 1; ++dz) {
          auto it = buckets_.find(hash(key[0] + dx, key[1] + dy, key[2] + dz));
          if (it == buckets_.end()) continue;
          for (std::size_t id : it->second) {
            if ((points_[id] - p).norm() <= tol_) return id;
          }
        }
      }
    }
    const std::size_t id = points_.size();
    points_.push_back(p);
    buckets_[hash(key[0], key[1], key[2])].push_back(id);
    return id;
  }

  const std::vector<Vec3>& points() const { return points_; }

 private:
  std::array<long long, 3> cell_key(const Vec3& p) const {
    const double s = 4.0 * tol_;
    return {static_cast<long long>(std::floor(p.x() / s)),
            static_cast<long long>(std::floor(p.y() / s)),
            static_cast<long long>(std::floor(p.z() / s))};
  }
  static std::size_t hash(long long a, long long b, long long c) {
    std::size_t h = std::hash<long long>{}(a);
    h ^= std::hash<long long>{}(b) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= std::hash<long long>{}(c) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }

  double tol_;
  std::vector<Vec3> points_;
  std::unordered_map<std::size_t, std::vector<std::size_t>> buckets_;
};

void check_dim(int dim) {
  if (dim != 2 && dim != 3) throw InputError("polytope: dimension must be 2 or 3");
}

}  // namespace

std::vector<HalfspaceCell> clip_halfspaces(int dim, std::span<const Vec3> normals,
                                           std::span<const double> offsets) {
  check_dim(dim);
  if (normals.size() != offsets.size()) throw InputError("clip_halfspaces: size mismatch");
  if (normals.size() < static_cast<std::size_t>(dim + 1)) {
    throw InputError("clip_halfspaces: too few halfspaces for a bounded body");
  }
  std::vector<Vec3> unit(normals.size());
  for (std::size_t i = 0; i < normals.size(); ++i) {
    const double len = normals[i].norm();
    if (!(len > 0.0)) throw InputError("clip_halfspaces: zero normal");
    unit[i] = normals[i] / len;
  }
  double scale = 0.0;
  for (double h : offsets) scale = std::max(scale, std::abs(h));
  scale = std::max(scale, 1e-300);

  auto run = [&](double radius) {
    return dim == 3 ? clip_3d(unit, offsets, radius, scale) : clip_2d(unit, offsets, radius, scale);
  };
  // Coarse pass with a huge bounding square, then redo with a tight one so
  // intersection points are computed from nearby coordinates.
  auto cells = run(1e6 * scale);
  double extent = 0.0;
  bool any = false;
  for (const auto& c : cells) {
    for (std::size_t k = 0; k < c.polygon.size(); ++k) {
      if (c.edge_planes[k] < 0) throw InputError("clip_halfspaces: intersection is unbounded");
      extent = std::max(extent, c.polygon[k].norm());
      any = true;
    }
  }
  if (!any) throw InputError("clip_halfspaces: intersection is empty");
  cells = run(4.0 * extent + scale);
  for (const auto& c : cells) {
    for (int tag : c.edge_planes) {
      if (tag < 0) throw InputError("clip_halfspaces: intersection is unbounded");
    }
  }
  return cells;
}

Polytope Polytope::from_halfspaces(int dim, std::span<const Vec3> normals,
                                   std::span<const double> offsets) {
  const auto cells = clip_halfspaces(dim, normals, offsets);
  double scale = 0.0;
  for (const auto& c : cells) {
    for (const auto& p : c.polygon) scale = std::max(scale, p.norm());
  }
  Polytope poly;
  poly.dim_ = dim;
  VertexPool pool(1e-10 * std::max(scale, 1e-300));
  for (std::size_t j = 0; j < cells.size(); ++j) {
    const auto& c = cells[j];
    if (c.polygon.empty() || c.area <= 0.0) continue;
    Facet f;
    f.normal = normals[j].normalized();
    f.offset = offsets[j];
    f.area = c.area;
    for (const auto& p : c.polygon) f.vertices.push_back(pool.insert(p));
    poly.facets_.push_back(std::move(f));
  }
  poly.vertices_ = pool.points();
  if (dim == 2) {
    std::sort(poly.facets_.begin(), poly.facets_.end(), [](const Facet& a, const Facet& b) {
      return std::atan2(a.normal.y(), a.normal.x()) < std::atan2(b.normal.y(), b.normal.x());
    });
  }
  return poly;
}

Polytope Polytope::from_vertices(int dim, std::span<const Vec3> points) {
  check_dim(dim);
  if (points.size() < static_cast<std::size_t>(dim + 1)) {
    throw InputError("Polytope::from_vertices: too few points");
  }
  Polytope poly;
  poly.dim_ = dim;
  if (dim == 2) {
    const auto hull = convex_hull_2d(points);
    if (hull.size() < 3) throw InputError("Polytope::from_vertices: degenerate planar point set");
    poly.vertices_ = hull;
    const std::size_t m = hull.size();
    for (std::size_t i = 0; i < m; ++i) {
      const Vec3 e = hull[(i + 1) % m] - hull[i];
      Facet f;
      f.normal = Vec3(e.y(), -e.x(), 0.0).normalized();
      f.offset = f.normal.dot(hull[i]);
      f.area = e.norm();
      f.vertices = {i, (i + 1) % m};
      poly.facets_.push_back(std::move(f));
    }
    std::sort(poly.facets_.begin(), poly.facets_.end(), [](const Facet& a, const Facet& b) {
      return std::atan2(a.normal.y(), a.normal.x()) < std::atan2(b.normal.y(), b.normal.x());
    });
    return poly;
  }

  // Hull by polar duality about the centroid: the dual polytope's vertices are
  // the hull's facets, its nonempty facets are the hull's vertices.
  Vec3 center = Vec3::Zero();
  for (const auto& p : points) center += p;
  center /= static_cast<double>(points.size());
  double scale = 0.0;
  for (const auto& p : points) scale = std::max(scale, (p - center).norm());
  if (!(scale > 0.0)) throw InputError("Polytope::from_vertices: all points coincide");

  std::vector<Vec3> normals;
  std::vector<double> offsets;
  std::vector<std::size_t> source;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const Vec3 q = points[k] - center;
    const double r = q.norm();
    if (r < 1e-12 * scale) continue;
    normals.push_back(q / r);
    offsets.push_back(1.0 / r);
    source.push_back(k);
  }
  std::vector<HalfspaceCell> cells;
  try {
    cells = clip_halfspaces(3, normals, offsets);
  } catch (const InputError&) {
    throw InputError("Polytope::from_vertices: degenerate (lower-dimensional) point set");
  }
  double dual_scale = 0.0;
  double max_area = 0.0;
  for (const auto& c : cells) {
    for (const auto& p : c.polygon) dual_scale = std::max(dual_scale, p.norm());
    max_area = std::max(max_area, c.area);
  }
  VertexPool dual_pool(1e-9 * dual_scale);
  std::vector<std::vector<std::size_t>> cell_vertices(cells.size());
  std::vector<std::size_t> hull_index(cells.size(), static_cast<std::size_t>(-1));
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (cells[k].area <= 1e-12 * max_area) continue;
    hull_index[k] = poly.vertices_.size();
    poly.vertices_.push_back(points[source[k]]);
    for (const auto& p : cells[k].polygon) cell_vertices[k].push_back(dual_pool.insert(p));
  }
  const auto& dual_vertices = dual_pool.points();
  std::vector<std::vector<std::size_t>> facet_members(dual_vertices.size());
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (hull_index[k] == static_cast<std::size_t>(-1)) continue;
    for (std::size_t m : cell_vertices[k]) {
      auto& members = facet_members[m];
      if (std::find(members.begin(), members.end(), hull_index[k]) == members.end()) {
        members.push_back(hull_index[k]);
      }
    }
  }
  for (std::size_t m = 0; m < dual_vertices.size(); ++m) {
    auto& members = facet_members[m];
    if (members.size() < 3) continue;
    const Vec3& y = dual_vertices[m];
    Facet f;
    f.normal = y.normalized();
    f.offset = 1.0 / y.norm() + f.normal.dot(center);
    Vec3 mid = Vec3::Zero();
    for (std::size_t id : members) mid += poly.vertices_[id];
    mid /= static_cast<double>(members.size());
    const auto [e1, e2] = tangent_frame(f.normal);
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      const Vec3 da = poly.vertices_[a] - mid;
      const Vec3 db = poly.vertices_[b] - mid;
      return std::atan2(da.dot(e2), da.dot(e1)) < std::atan2(db.dot(e2), db.dot(e1));
    });
    std::vector<Vec3> ring;
    for (std::size_t id : members) ring.push_back(poly.vertices_[id]);
    f.area = polygon_area(ring, f.normal);
    // tangent_frame is right-handed about the normal, so ascending angle is
    // counter-clockwise seen from outside.
    f.vertices = members;
    poly.facets_.push_back(std::move(f));
  }
  return poly;
}

double Polytope::support(const Vec3& u) const {
  if (vertices_.empty()) throw InputError("support: empty body");
  double best = vertices_[0].dot(u);
  for (const auto& v : vertices_) best = std::max(best, v.dot(u));
  return best;
}

double Polytope::volume() const {
  CompensatedSum s;
  for (const auto& f : facets_) s.add(f.area * f.offset);
  return s.value() / dim_;
}

double Polytope::surface_area() const {
  CompensatedSum s;
  for (const auto& f : facets_) s.add(f.area);
  return s.value();
}

Vec3 Polytope::vertex_centroid() const {
  Vec3 c = Vec3::Zero();
  for (const auto& v : vertices_) c += v;
  return vertices_.empty() ? c : Vec3(c / static_cast<double>(vertices_.size()));
}

Vec3 Polytope::closure_defect() const {
  Vec3 acc = Vec3::Zero();
  for (const auto& f : facets_) acc += f.area * f.normal;
  return acc;
}

Polytope Polytope::translated(const Vec3& t) const {
  Polytope out = *this;
  for (auto& v : out.vertices_) v += t;
  for (auto& f : out.facets_) f.offset += f.normal.dot(t);
  return out;
}

Polytope Polytope::scaled(double c) const {
  if (!(c > 0.0)) throw InputError("Polytope::scaled: factor must be positive");
  Polytope out = *this;
  for (auto& v : out.vertices_) v *= c;
  const double area_factor = dim_ == 3 ? c * c : c;
  for (auto& f : out.facets_) {
    f.offset *= c;
    f.area *= area_factor;
  }
  return out;
}

std::vector<Vec3> convex_hull_2d(std::span<const Vec3> points) {
  std::vector<Vec3> pts(points.begin(), points.end());
  for (auto& p : pts) p.z() = 0.0;
  std::sort(pts.begin(), pts.end(), [](const Vec3& a, const Vec3& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  if (pts.size() < 3) return pts;
  double scale = 0.0;
  for (const auto& p : pts) scale = std::max(scale, p.norm());
  const double eps = 1e-14 * scale * scale;
  auto cross = [](const Vec3& o, const Vec3& a, const Vec3& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<Vec3> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= eps) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i - 1]) <= eps) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k - 1);
  return hull;
}

double hull_area_2d(std::span<const Vec3> points) {
  const auto hull = convex_hull_2d(points);
  if (hull.size() < 3) return 0.0;
  CompensatedSum s;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Vec3& a = hull[i];
    const Vec3& b = hull[(i + 1) % hull.size()];
    s.add(a.x() * b.y() - a.y() * b.x());
  }
  return 0.5 * s.value();
}

}  // namespace finsler
