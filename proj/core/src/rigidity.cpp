#include "finsler/rigidity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "finsler/error.hpp"
#include "finsler/geodesic.hpp"

namespace finsler {

namespace {

const DirectionGrid& fiber_grid(int dim) { return sphere_grid(dim, dim == 2 ? 0 : 2); }

// Linear fit of g(x, .) over the fiber directions at x. `odd` fits the odd
// part only. The fitted covector is returned in ambient coordinates.
PointFit fit_fiber(const MetricField& frames, const Vec3& x,
                   const std::function<double(const Vec3&, const Vec3&)>& g, bool odd) {
  const DirectionGrid& grid = fiber_grid(frames.dim());
  std::vector<double> s(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) s[i] = g(x, frames.from_frame(x, grid.nodes[i]));
  std::vector<double> fit_samples(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    fit_samples[i] = odd ? 0.5 * (s[i] - s[grid.antipode[i]]) : s[i];
  }
  const LinearFit fit = linear_fit_residual(grid, fit_samples);
  return {frames.from_frame(x, fit.beta), fit.residual};
}

double relative(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), 1e-300); }

Vec3 uniform_on_sphere(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v;
  do {
    v = Vec3(n(rng), n(rng), n(rng));
  } while (v.norm() < 1e-6);
  return v.normalized();
}

ParametrizedCurve segment(const Vec3& a, const Vec3& b) {
  ParametrizedCurve c;
  c.point = [a, b](double t) -> Vec3 { return a + t * (b - a); };
  c.velocity = [a, b](double) -> Vec3 { return b - a; };
  c.name = "segment";
  return c;
}

ParametrizedCurve shortest_path(bool sphere, const Vec3& a, const Vec3& b) {
  return sphere ? SphereCurve::arc(a, b).curve : segment(a, b);
}

const Vec3 kGenericPole = Vec3(0.2, 0.3, 0.93).normalized();

}  // namespace

PointFit fit_odd_part(const MetricField& field, const Vec3& x) {
  return fit_fiber(
      field, x, [&field](const Vec3& p, const Vec3& v) { return field(p, v); }, true);
}

double closedness_residual(const OneFormField& beta, const std::vector<Vec3>& nodes,
                           int chart_dim, double side) {
  if (!(side > 0.0)) throw InputError("closedness_residual: loop side must be positive");
  const GaussRule& gl = gauss_legendre(4);
  const bool sphere = beta.on_sphere();
  std::vector<double> worst(nodes.size(), 0.0);
  parallel_for(nodes.size(), default_jobs(), [&](std::size_t k) {
    const Vec3 c = sphere ? nodes[k].normalized() : nodes[k];
    std::vector<std::pair<Vec3, Vec3>> planes;
    if (sphere) {
      planes.push_back(tangent_frame(c));
    } else {
      planes.emplace_back(Vec3::UnitX(), Vec3::UnitY());
      if (chart_dim == 3) {
        planes.emplace_back(Vec3::UnitX(), Vec3::UnitZ());
        planes.emplace_back(Vec3::UnitY(), Vec3::UnitZ());
      }
    }
    for (const auto& [e1, e2] : planes) {
      auto point = [&](double y1, double y2) -> Vec3 {
        const Vec3 p = c + y1 * e1 + y2 * e2;
        return sphere ? Vec3(p.normalized()) : p;
      };
      auto push = [&](double y1, double y2, double w1, double w2) -> Vec3 {
        if (!sphere) return w1 * e1 + w2 * e2;
        const Vec3 p = c + y1 * e1 + y2 * e2;
        const double r = p.norm();
        const Vec3 x = p / r;
        const Vec3 w = w1 * e1 + w2 * e2;
        return (w - x.dot(w) * x) / r;
      };
      const double s = 0.5 * side;
      const double corners[5][2] = {{-s, -s}, {s, -s}, {s, s}, {-s, s}, {-s, -s}};
      CompensatedSum loop;
      for (int e = 0; e < 4; ++e) {
        const double a1 = corners[e][0], a2 = corners[e][1];
        const double d1 = corners[e + 1][0] - a1, d2 = corners[e + 1][1] - a2;
        for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
          const double t = 0.5 * (gl.nodes[q] + 1.0);
          const double y1 = a1 + t * d1, y2 = a2 + t * d2;
          loop.add(0.5 * gl.weights[q] * beta(point(y1, y2), push(y1, y2, d1, d2)));
        }
      }
      worst[k] = std::max(worst[k], std::abs(loop.value()) / (side * side));
    }
  });
  return nodes.empty() ? 0.0 : *std::max_element(worst.begin(), worst.end());
}

std::vector<Vec3> default_nodes(const MetricField& field) {
  if (field.on_sphere()) return sphere_grid(3, 1).nodes;
  std::vector<Vec3> out;
  const double h = 0.25 * std::min(field.extent(), 10.0);
  const int kmax = field.dim() == 3 ? 1 : 0;
  const int step = field.dim() == 3 ? 2 : 1;
  for (int i = -2; i <= 2; i += step) {
    for (int j = -2; j <= 2; j += step) {
      for (int k = -kmax; k <= kmax; ++k) {
        const Vec3 x(i * h, j * h, k * 2 * h);
        if (field.contains(x)) out.push_back(x);
      }
    }
  }
  return out;
}

ReversiblePlusClosed detect_reversible_plus_closed(const MetricField& field,
                                                   const ReversiblePlusClosedOptions& options) {
  ReversiblePlusClosed out;
  out.nodes = options.nodes.empty() ? default_nodes(field) : options.nodes;
  if (out.nodes.empty()) throw InputError("detect_reversible_plus_closed: no base nodes");
  for (const Vec3& x : out.nodes) {
    if (!field.contains(x)) throw InputError("detect_reversible_plus_closed: node outside the base");
  }
  out.linearity.assign(out.nodes.size(), 0.0);
  parallel_for(out.nodes.size(), default_jobs(), [&](std::size_t k) {
    out.linearity[k] = fit_odd_part(field, out.nodes[k]).residual;
  });
  const auto worst = std::max_element(out.linearity.begin(), out.linearity.end());
  out.max_linearity = *worst;
  out.beta = OneFormField(
      field.on_sphere(), [field](const Vec3& x) { return fit_odd_part(field, x).beta; },
      "fitted_odd_part");
  out.closedness = closedness_residual(out.beta, out.nodes, field.dim(), options.loop_side);
  out.reversible = add_one_form(field, out.beta.negated());

  CheckReport& rep = out.report;
  rep.check = "rev-plus-closed";
  rep.inputs = {{"field", field.description()},
                {"nodes", out.nodes.size()},
                {"loop_side", options.loop_side}};
  const Vec3 wx = out.nodes[static_cast<std::size_t>(worst - out.linearity.begin())];
  rep.values["worst_node_x"] = wx.x();
  rep.values["worst_node_y"] = wx.y();
  rep.values["worst_node_z"] = wx.z();
  rep.add("linearity", out.max_linearity, options.linearity_tol);
  rep.add("closedness", out.closedness, options.closedness_tol);
  rep.finalize();
  return out;
}

double path_integral(const OneFormField& beta, const Vec3& a, const Vec3& b, int order) {
  if ((a - b).norm() < 1e-14) return 0.0;
  const ParametrizedCurve c = shortest_path(beta.on_sphere(), a, b);
  return gauss_integrate([&](double t) { return beta(c.point(t), c.tangent(t)); }, c.t0, c.t1,
                         order);
}

PotentialRecovery recover_potential(const OneFormField& beta, const Vec3& z,
                                    const std::vector<Vec3>& points,
                                    const PotentialOptions& options) {
  const bool sphere = beta.on_sphere();
  const Vec3 base = sphere ? Vec3(z.normalized()) : z;
  // Arcs between near-antipodal points are ill-defined; detour through a
  // point a quarter turn away.
  auto integral = [&](const Vec3& a, const Vec3& b) {
    if (sphere && a.normalized().dot(b.normalized()) < -0.9) {
      const Vec3 m = tangent_frame(a.normalized()).first;
      return path_integral(beta, a, m, options.order) + path_integral(beta, m, b, options.order);
    }
    return path_integral(beta, a, b, options.order);
  };

  PotentialRecovery out;
  out.values.resize(points.size());
  parallel_for(points.size(), default_jobs(),
               [&](std::size_t k) { out.values[k] = integral(base, points[k]); });

  bool planar = base.z() == 0.0;
  for (const Vec3& p : points) planar = planar && p.z() == 0.0;
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  auto random_point = [&]() -> Vec3 {
    if (sphere) return uniform_on_sphere(rng);
    Vec3 d;
    do {
      d = Vec3(unif(rng), unif(rng), planar ? 0.0 : unif(rng));
    } while (d.norm() > 1.0);
    return base + options.chart_radius * d;
  };
  for (int loop = 0; loop < options.loops; ++loop) {
    Vec3 a, b, c;
    double area = 0.0;
    for (;;) {
      a = random_point();
      b = random_point();
      c = random_point();
      if (sphere) {
        if (a.dot(b) < -0.9 || b.dot(c) < -0.9 || c.dot(a) < -0.9) continue;
        area = 2.0 * std::atan2(std::abs(a.dot(b.cross(c))), 1.0 + a.dot(b) + b.dot(c) + c.dot(a));
      } else {
        area = 0.5 * (b - a).cross(c - a).norm();
      }
      if (area > 1e-3) break;
    }
    const double circ = path_integral(beta, a, b, options.order) +
                        path_integral(beta, b, c, options.order) +
                        path_integral(beta, c, a, options.order);
    out.max_loop_residual = std::max(out.max_loop_residual, std::abs(circ) / area);
  }
  if (out.max_loop_residual > 10.0 * options.closedness_budget) {
    throw InputError("recover_potential: loop residual " + std::to_string(out.max_loop_residual) +
                     " exceeds 10x the closedness budget");
  }
  return out;
}

CheckReport distance_asymmetry_audit(const MetricField& field,
                                     const std::function<double(const Vec3&)>& potential,
                                     int pairs, std::uint64_t seed, double tol) {
  if (pairs <= 0) throw InputError("distance_asymmetry_audit: need at least one pair");
  const bool sphere = field.on_sphere();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<std::pair<Vec3, Vec3>> xy;
  while (static_cast<int>(xy.size()) < pairs) {
    Vec3 x, y;
    if (sphere) {
      x = uniform_on_sphere(rng);
      y = uniform_on_sphere(rng);
      if (x.dot(y) < -0.9 || x.dot(y) > 0.99) continue;
    } else {
      const double r = 0.5 * std::min(field.extent(), 10.0);
      x = Vec3(unif(rng), unif(rng), field.dim() == 3 ? unif(rng) : 0.0) * r;
      y = Vec3(unif(rng), unif(rng), field.dim() == 3 ? unif(rng) : 0.0) * r;
      if (!field.contains(x) || !field.contains(y) || (x - y).norm() < 1e-2) continue;
    }
    xy.emplace_back(x, y);
  }
  std::vector<double> err(xy.size());
  parallel_for(xy.size(), default_jobs(), [&](std::size_t k) {
    const auto& [x, y] = xy[k];
    const double dxy = hypersurface_area(field, shortest_path(sphere, x, y));
    const double dyx = hypersurface_area(field, shortest_path(sphere, y, x));
    err[k] = std::abs((dxy - dyx) - 2.0 * (potential(y) - potential(x)));
  });
  CheckReport rep;
  rep.check = "distance-asymmetry";
  rep.inputs = {{"field", field.description()}, {"pairs", pairs}, {"seed", seed}};
  rep.add("max_mismatch", *std::max_element(err.begin(), err.end()), tol);
  rep.finalize();
  return rep;
}

CheckReport zoll_volume_check(const MetricField& field, int grid_level, double tol,
                              double integer_tol) {
  if (!field.on_sphere() || !field.is_busemann()) {
    throw InputError("zoll_volume_check: needs a Busemann field on S^2");
  }
  const double ell = prime_geodesic_length(field);
  const double vol = ht_volume(field, WholeSphere{grid_level});
  const double predicted = ell * ell / kPi;
  const double ratio = vol * 2.0 * kPi / (ell * ell);
  CheckReport rep;
  rep.check = "zoll";
  rep.inputs = {{"field", field.description()}, {"grid_level", grid_level}};
  rep.lhs = vol;
  rep.rhs = predicted;
  rep.values["length"] = ell;
  rep.values["volume"] = vol;
  rep.values["predicted_volume"] = predicted;
  rep.values["integer_ratio"] = ratio;
  rep.values["integer"] = std::round(ratio);
  rep.add("volume_identity", relative(vol, predicted), tol);
  rep.add("integer_distance", std::abs(ratio - 2.0), integer_tol);
  rep.finalize();
  return rep;
}

CheckReport ht_density_rigidity_check(const MetricField& f1, const MetricField& f2,
                                      const DensityRigidityOptions& options) {
  if (!f1.on_sphere() || !f2.on_sphere()) {
    throw InputError("ht_density_rigidity_check: needs two fields on S^2");
  }
  CheckReport rep;
  rep.check = "density-rigidity";
  rep.inputs = {{"f1", f1.description()},
                {"f2", f2.description()},
                {"node_level", options.node_level},
                {"volume_level", options.volume_level}};

  // Great circles are the common geodesics; their F-length is the prime length.
  const ParametrizedCurve circle = SphereCurve::great_circle(kGenericPole).curve;
  const double l1 = hypersurface_area(f1, circle);
  const double l2 = hypersurface_area(f2, circle);
  const double v1 = ht_volume(f1, WholeSphere{options.volume_level});
  const double v2 = ht_volume(f2, WholeSphere{options.volume_level});
  rep.values["length_1"] = l1;
  rep.values["length_2"] = l2;
  rep.values["volume_1"] = v1;
  rep.values["volume_2"] = v2;

  const MetricField avg = average_field(f1, f2);
  const auto& nodes = sphere_grid(3, options.node_level).nodes;
  const std::size_t n = nodes.size();
  std::vector<double> d1(n), d2(n), da(n), lin(n);
  parallel_for(n, default_jobs(), [&](std::size_t k) {
    d1[k] = ht_volume_density(f1, nodes[k]);
    d2[k] = ht_volume_density(f2, nodes[k]);
    da[k] = ht_volume_density(avg, nodes[k]);
  });
  auto difference = [f1, f2](const Vec3& x, const Vec3& v) { return f2(x, v) - f1(x, v); };
  parallel_for(n, default_jobs(), [&](std::size_t k) {
    lin[k] = fit_fiber(f1, nodes[k], difference, false).residual;
  });
  double mismatch = 0.0;
  double excess_max = -std::numeric_limits<double>::infinity();
  double excess_min = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    mismatch = std::max(mismatch, relative(d1[k], d2[k]));
    // Brunn-Minkowski in the plane: the average co-disc has area at least
    // ((sqrt a1 + sqrt a2) / 2)^2, with equality iff the co-discs are homothetic.
    const double bm = 0.25 * std::pow(std::sqrt(d1[k]) + std::sqrt(d2[k]), 2);
    const double excess = (da[k] - bm) / d1[k];
    excess_max = std::max(excess_max, excess);
    excess_min = std::min(excess_min, excess);
  }
  const OneFormField diff_form(
      true, [f1, f2, difference](const Vec3& x) {
        return fit_fiber(f1, x, difference, false).beta;
      },
      "fitted_difference");
  const double closed = closedness_residual(diff_form, nodes);
  rep.values["bm_excess_max"] = excess_max;
  rep.values["bm_excess_min"] = excess_min;
  rep.add("length_mismatch", relative(l1, l2), options.length_tol);
  rep.add("volume_mismatch", relative(v1, v2), options.volume_tol);
  rep.add("density_mismatch", mismatch, options.density_tol);
  rep.add("difference_linearity", *std::max_element(lin.begin(), lin.end()),
          options.linearity_tol);
  rep.add("difference_closedness", closed, options.closedness_tol);
  rep.finalize();
  return rep;
}

CheckReport chakerian_check(const ConvexBody& body, const ConvexBody& gauge, double tol,
                            int grid_level) {
  if (body.dim() != 3 || gauge.dim() != 3) throw InputError("chakerian_check: needs n = 3");
  const DirectionGrid& grid = sphere_grid(3, grid_level);
  const std::size_t n = grid.size();
  std::vector<double> hk(n), hb(n);
  double hmax = 0.0, asym = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    hk[i] = body.support(grid.nodes[i]);
    hb[i] = gauge.support(grid.nodes[i]);
    hmax = std::max(hmax, std::abs(hb[i]));
  }
  for (std::size_t i = 0; i < n; ++i) asym = std::max(asym, std::abs(hb[i] - hb[grid.antipode[i]]));
  if (asym > 1e-9 * hmax) throw InputError("chakerian_check: gauge body is not origin-symmetric");
  if (!(hmax > 0.0)) throw InputError("chakerian_check: degenerate gauge body");

  std::vector<double> bk(n), bb(n);
  parallel_for(n, default_jobs(), [&](std::size_t i) {
    bk[i] = brightness(body, grid.nodes[i]);
    bb[i] = brightness(gauge, grid.nodes[i]);
  });

  // Weighted least-squares multiple of the gauge quantity, then the worst
  // relative deviation from it.
  auto fit = [&](const std::vector<double>& k, const std::vector<double>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      num += grid.weights[i] * k[i] * b[i];
      den += grid.weights[i] * b[i] * b[i];
    }
    const double lambda = num / den;
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) r = std::max(r, std::abs(k[i] - lambda * b[i]) / (lambda * b[i]));
    return std::make_pair(lambda, r);
  };
  std::vector<double> hd(n);
  for (std::size_t i = 0; i < n; ++i) hd[i] = 0.5 * (hk[i] + hk[grid.antipode[i]]);
  const auto [lw, rw] = fit(hd, hb);
  const auto [lb, rb] = fit(bk, bb);

  std::vector<double> g(n);
  double mean_hb = 0.0, total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = hk[i] - lw * hb[i];
    mean_hb += grid.weights[i] * hb[i];
    total += grid.weights[i];
  }
  mean_hb /= total;
  const LinearFit centre = linear_fit_residual(grid, g);
  const double rc = centre.residual / (lw * mean_hb);

  CheckReport rep;
  rep.check = "chakerian";
  rep.inputs = {{"body", body.family()}, {"gauge", gauge.family()}, {"grid_level", grid_level}};
  rep.values["lambda_width"] = lw;
  rep.values["lambda_brightness"] = lb;
  rep.values["centre_x"] = centre.beta.x();
  rep.values["centre_y"] = centre.beta.y();
  rep.values["centre_z"] = centre.beta.z();
  rep.add("width", rw, tol);
  rep.add("brightness", rb, tol);
  rep.add("centre", rc, tol);
  rep.finalize();
  return rep;
}

SymmetrizationGap symmetrization_gap(const ConvexBody& body) {
  SymmetrizationGap g;
  g.volume = volume(body);
  g.symmetral_volume = volume(central_symmetral(body));
  g.relative_gap = (g.symmetral_volume - g.volume) / g.volume;
  return g;
}

std::vector<CorpusBody> brunn_minkowski_corpus(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<CorpusBody> out;
  for (int b = 0; b < count; ++b) {
    const bool symmetric = b % 2 == 1;
    std::vector<std::array<double, 3>> modes;  // k, amplitude, phase
    for (int k = 2; k <= 6; ++k) {
      if (symmetric && k % 2 == 1) continue;
      // Sum (k^2 - 1) c_k stays below 0.6, which keeps h + h'' > 0.
      double amp = unif(rng) * 0.3 / (4.0 * (k * k - 1));
      if (k == 3) amp = 0.01 + 0.02 * unif(rng);
      modes.push_back({double(k), amp, 2.0 * kPi * unif(rng)});
    }
    const Vec3 t(0.4 * unif(rng) - 0.2, 0.4 * unif(rng) - 0.2, 0.0);
    auto h = [modes, t](const Vec3& u) {
      const double r = std::hypot(u.x(), u.y());
      if (r == 0.0) return 0.0;
      const double th = std::atan2(u.y(), u.x());
      double s = 1.0;
      for (const auto& [k, a, ph] : modes) s += a * std::cos(k * th - ph);
      return r * s + t.dot(u);
    };
    out.push_back({ConvexBody::from_support(2, h, "fourier-" + std::to_string(b)), symmetric,
                   (symmetric ? "symmetric-" : "asymmetric-") + std::to_string(b)});
  }
  return out;
}

ConvexBody rotated_reuleaux(double width, int grid_level) {
  if (!(width > 0.0)) throw InputError("rotated_reuleaux: width must be positive");
  // Unit-width Reuleaux triangle in the (r, z) half-plane, centroid at the
  // origin, one vertex on the z axis.
  const double s3 = std::sqrt(3.0);
  const std::array<Eigen::Vector2d, 3> p = {Eigen::Vector2d(0.0, 1.0 / s3),
                                            Eigen::Vector2d(-0.5, -0.5 / s3),
                                            Eigen::Vector2d(0.5, -0.5 / s3)};
  auto h2 = [p](const Eigen::Vector2d& q) {
    const double r = q.norm();
    if (r == 0.0) return 0.0;
    const Eigen::Vector2d u = q / r;
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& pj : p) {
      // Arc of radius 1 about p_j, facing away from p_j, 60 degrees wide.
      const Eigen::Vector2d d = -pj.normalized();
      const double delta = std::acos(std::clamp(u.dot(d), -1.0, 1.0));
      const double arc = std::cos(std::max(0.0, delta - kPi / 6.0));
      best = std::max(best, pj.dot(u) + std::max(0.0, arc));
    }
    return r * best;
  };
  auto h = [h2, width](const Vec3& u) {
    return width * h2(Eigen::Vector2d(std::hypot(u.x(), u.y()), u.z()));
  };
  return ConvexBody::from_support(3, h, "rotated_reuleaux", grid_level);
}

ConvexBody regular_tetrahedron() {
  const double c = 1.0 / std::sqrt(3.0);
  const std::vector<Vec3> v = {Vec3(c, c, c), Vec3(c, -c, -c), Vec3(-c, c, -c), Vec3(-c, -c, c)};
  return ConvexBody::from_vertices(3, v);
}

ConvexBody constant_brightness_body(double eps, int level, const MinkowskiOptions& options) {
  if (!(std::abs(eps) < 1.0)) throw InputError("constant_brightness_body: need |eps| < 1");
  const DirectionGrid& grid = sphere_grid(3, level);
  const std::size_t n = grid.size();
  std::vector<double> a(n);
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  Vec3 s = Vec3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& u = grid.nodes[i];
    const double z = u.z();
    a[i] = grid.weights[i] * (1.0 + eps * 0.5 * (5.0 * z * z * z - 3.0 * z));
    m += grid.weights[i] * u * u.transpose();
    s += a[i] * u;
  }
  // Remove the discrete linear part so that the data closes up.
  const Vec3 lambda = m.ldlt().solve(s);
  for (std::size_t i = 0; i < n; ++i) a[i] -= grid.weights[i] * lambda.dot(grid.nodes[i]);
  const MinkowskiSolution sol = solve_minkowski_problem(grid.nodes, a, options);
  return ConvexBody::from_polytope(sol.polytope, "constant_brightness");
}

}  // namespace finsler
