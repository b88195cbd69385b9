#include "finsler/geodesic.hpp"

#include <array>
#include <cmath>

#include <boost/numeric/odeint.hpp>

#include "finsler/error.hpp"

namespace finsler {

namespace odeint = boost::numeric::odeint;

Vec3 hilbert_form(const MetricField& field, const Vec3& x, const Vec3& v) {
  if (v.norm() == 0.0) throw InputError("hilbert_form: zero velocity");
  return field.gradient(x, v);
}

namespace {

using Vec2 = Eigen::Vector2d;
using State = std::array<double, 4>;  // chart point y, chart covector xi

struct LeftChart {};

// Planar chart, or a gnomonic chart of S^2 centred at c.
struct Chart {
  const MetricField* field = nullptr;
  bool sphere = false;
  Vec3 c = Vec3::Zero(), e1 = Vec3::UnitX(), e2 = Vec3::UnitY();

  void center_at(const Vec3& x) {
    c = x.normalized();
    const auto f = tangent_frame(c);
    e1 = f.first;
    e2 = f.second;
  }

  Vec3 point(const Vec2& y) const {
    if (!sphere) return Vec3(y.x(), y.y(), 0.0);
    return (c + y.x() * e1 + y.y() * e2).normalized();
  }

  // Columns of the differential of point() at y.
  std::pair<Vec3, Vec3> columns(const Vec2& y) const {
    if (!sphere) return {Vec3::UnitX(), Vec3::UnitY()};
    const Vec3 p = c + y.x() * e1 + y.y() * e2;
    const double r = p.norm();
    const Vec3 x = p / r;
    return {(e1 - x.dot(e1) * x) / r, (e2 - x.dot(e2) * x) / r};
  }

  Vec3 push(const Vec2& y, const Vec2& w) const {
    const auto [d1, d2] = columns(y);
    return w.x() * d1 + w.y() * d2;
  }

  double F(const Vec2& y, const Vec2& w) const {
    const Vec3 x = point(y);
    if (!field->contains(x)) throw LeftChart{};
    return (*field)(x, push(y, w));
  }

  // Chart coordinates of the ambient tangent vector t at point(0) = c.
  Vec2 pull_at_center(const Vec3& t) const {
    if (!sphere) return Vec2(t.x(), t.y());
    return Vec2(t.dot(e1), t.dot(e2));
  }

  // Ambient covector representing the chart covector xi at y.
  Vec3 ambient_covector(const Vec2& y, const Vec2& xi) const {
    if (!sphere) return Vec3(xi.x(), xi.y(), 0.0);
    const auto [d1, d2] = columns(y);
    Eigen::Matrix2d g;
    g << d1.dot(d1), d1.dot(d2), d2.dot(d1), d2.dot(d2);
    const Vec2 a = g.ldlt().solve(xi);
    return a.x() * d1 + a.y() * d2;
  }
};

struct Inverse {
  double dual = 0.0;   // F*(xi)
  Vec2 v = Vec2::Zero();  // unit-F vector maximizing xi(w) / F(w)
  double angle = 0.0;
};

// Inverse Legendre map by Newton's method on the angle, warm-started at
// `angle`; falls back to grid seeding when Newton misbehaves.
Inverse inverse_legendre(const Chart& chart, const Vec2& y, const Vec2& xi, double angle) {
  auto g = [&](double t) {
    const Vec2 w(std::cos(t), std::sin(t));
    return xi.dot(w) / chart.F(y, w);
  };
  const double h = 1e-3;
  double t = angle;
  bool converged = false;
  for (int attempt = 0; attempt < 2 && !converged; ++attempt) {
    if (attempt == 1) t = maximize_on_circle(g, 64).angle;
    for (int it = 0; it < 30; ++it) {
      const double gm2 = g(t - 2 * h), gm1 = g(t - h), g0 = g(t), gp1 = g(t + h), gp2 = g(t + 2 * h);
      const double d1 = (-gp2 + 8 * gp1 - 8 * gm1 + gm2) / (12 * h);
      const double d2 = (-gp2 + 16 * gp1 - 30 * g0 + 16 * gm1 - gm2) / (12 * h * h);
      if (!(d2 < 0.0)) break;
      double step = -d1 / d2;
      if (std::abs(step) > 0.2) break;
      t += step;
      if (std::abs(step) < 1e-10) {
        converged = true;
        break;
      }
    }
  }
  if (!converged) {
    // Close to a chart boundary the fiber degenerates faster than the angular
    // stencil resolves it; report that as reaching the boundary.
    if (!chart.sphere && chart.field->boundary_margin(chart.point(y)) < 1e-3) throw LeftChart{};
    throw ConvergenceError("geodesic_trace: inverse Legendre map failed to converge");
  }
  Inverse r;
  const Vec2 w(std::cos(t), std::sin(t));
  const double f = chart.F(y, w);
  r.dual = xi.dot(w) / f;
  r.v = w / f;
  r.angle = t;
  return r;
}

struct Hamiltonian {
  Chart* chart;
  double sign;
  double* angle;  // warm start shared with the driver

  void operator()(const State& s, State& ds, double) const {
    const Vec2 y(s[0], s[1]);
    const Vec2 xi(s[2], s[3]);
    const Inverse inv = inverse_legendre(*chart, y, xi, *angle);
    *angle = inv.angle;
    // Envelope theorem: dH/dxi = F* v, dH/dy = -F*^2 d_y F(y, v).
    double h = 1e-3;
    if (!chart->sphere) {
      const double margin = chart->field->boundary_margin(chart->point(y));
      if (std::isfinite(margin)) h = 1e-3 * std::clamp(margin, 1e-4, 1.0);
    }
    Vec2 dy;
    for (int i = 0; i < 2; ++i) {
      Vec2 e = Vec2::Zero();
      e[i] = h;
      dy[i] = (-chart->F(y + 2 * e, inv.v) + 8 * chart->F(y + e, inv.v) -
               8 * chart->F(y - e, inv.v) + chart->F(y - 2 * e, inv.v)) /
              (12 * h);
    }
    const double f2 = inv.dual * inv.dual;
    ds[0] = sign * inv.dual * inv.v.x();
    ds[1] = sign * inv.dual * inv.v.y();
    ds[2] = sign * f2 * dy.x();
    ds[3] = sign * f2 * dy.y();
  }
};

GeodesicState make_state(const Chart& chart, const State& s, double t, double* angle) {
  const Vec2 y(s[0], s[1]);
  const Vec2 xi(s[2], s[3]);
  const Inverse inv = inverse_legendre(chart, y, xi, *angle);
  GeodesicState out;
  out.t = t;
  out.x = chart.point(y);
  out.v = chart.push(y, inv.v);
  out.xi = chart.ambient_covector(y, xi);
  out.energy = 0.5 * inv.dual * inv.dual;
  return out;
}

}  // namespace

GeodesicTrajectory geodesic_trace(const MetricField& field, const Vec3& x0, const Vec3& v0,
                                  double T, const TraceOptions& options) {
  if (field.dim() != 2) throw InputError("geodesic_trace: only surfaces (S^2 or planar charts)");
  if (!std::isfinite(T)) throw InputError("geodesic_trace: non-finite length");
  Chart chart;
  chart.field = &field;
  chart.sphere = field.on_sphere();
  Vec3 x = x0;
  Vec3 v = v0;
  if (chart.sphere) {
    x = x0.normalized();
    v = v0 - v0.dot(x) * x;
    chart.center_at(x);
  }
  if (!field.contains(x)) throw InputError("geodesic_trace: initial point outside the base");
  if (v.norm() == 0.0) throw InputError("geodesic_trace: zero initial velocity");

  const Vec3 g = hilbert_form(field, x, v);
  State s{};
  Vec2 y0 = chart.sphere ? Vec2::Zero() : Vec2(x.x(), x.y());
  Vec2 w0 = chart.pull_at_center(v);
  if (chart.sphere) {
    s = {0.0, 0.0, g.dot(chart.e1), g.dot(chart.e2)};
  } else {
    s = {y0.x(), y0.y(), g.x(), g.y()};
  }
  double angle = std::atan2(w0.y(), w0.x());
  const double sign = T < 0.0 ? -1.0 : 1.0;
  const double length = std::abs(T);
  Hamiltonian ham{&chart, sign, &angle};

  GeodesicTrajectory traj;
  double out_angle = angle;
  auto record = [&](const State& st, double tau) {
    GeodesicState gs = make_state(chart, st, sign * tau, &out_angle);
    traj.states.push_back(gs);
  };
  record(s, 0.0);
  const double h0 = traj.states.front().energy;

  const int samples = std::max(1, options.samples);
  int next = 1;
  auto next_time = [&](int k) { return length * k / samples; };

  auto stepper = odeint::make_dense_output(options.atol, options.rtol,
                                           odeint::runge_kutta_dopri5<State>());
  double dt = std::min(0.05, std::max(length, 1e-6) / 8);
  stepper.initialize(s, 0.0, dt);
  try {
    while (next <= samples) {
      const auto [ta, tb] = stepper.do_step(ham);
      ++traj.steps;
      if (traj.steps > 2000000) throw ConvergenceError("geodesic_trace: step budget exhausted");
      while (next <= samples && next_time(next) <= tb) {
        State out;
        stepper.calc_state(next_time(next), out);
        record(out, next_time(next));
        ++next;
      }
      (void)ta;
      State cur = stepper.current_state();
      const Vec2 ycur(cur[0], cur[1]);
      if (!chart.sphere) {
        if (field.boundary_margin(chart.point(ycur)) < options.boundary_guard) {
          traj.hit_boundary = true;
          break;
        }
        continue;
      }
      if (ycur.norm() > options.recenter_radius && next <= samples) {
        // Re-centre the gnomonic chart at the current point; xi transforms by
        // the Jacobian of (old chart) o (new chart)^-1 at the new origin.
        const Vec3 xc = chart.point(ycur);
        const Vec2 xi_old(cur[2], cur[3]);
        const Inverse inv = inverse_legendre(chart, ycur, xi_old, angle);
        const Vec3 vamb = chart.push(ycur, inv.v);
        Chart fresh = chart;
        fresh.center_at(xc);
        const double xc_c = xc.dot(chart.c);
        Vec2 xi_new;
        const Vec3 cols[2] = {fresh.e1, fresh.e2};
        for (int j = 0; j < 2; ++j) {
          const Vec3 d = cols[j] / xc_c - xc * (cols[j].dot(chart.c)) / (xc_c * xc_c);
          xi_new[j] = xi_old.dot(Vec2(d.dot(chart.e1), d.dot(chart.e2)));
        }
        chart = fresh;
        const Vec2 wnew = chart.pull_at_center(vamb);
        angle = std::atan2(wnew.y(), wnew.x());
        out_angle = angle;
        const double tnow = stepper.current_time();
        const double dtnow = stepper.current_time_step();
        stepper.initialize(State{0.0, 0.0, xi_new.x(), xi_new.y()}, tnow, dtnow);
        ++traj.recenterings;
      }
    }
  } catch (const LeftChart&) {
    traj.hit_boundary = true;
  }
  for (const auto& st : traj.states) {
    traj.max_energy_drift = std::max(traj.max_energy_drift, std::abs(st.energy - h0) / h0);
    traj.max_speed_error = std::max(traj.max_speed_error, std::abs(field(st.x, st.v) - 1.0));
    if (chart.sphere) {
      traj.max_sphere_error = std::max(traj.max_sphere_error, std::abs(st.x.norm() - 1.0));
    }
  }
  return traj;
}

namespace {

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double l2 = ab.squaredNorm();
  if (l2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / l2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

double distance_to_polyline(const Vec3& p, const std::vector<Vec3>& line) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    best = std::min(best, point_segment_distance(p, line[i], line[i + 1]));
  }
  if (line.size() == 1) best = (p - line[0]).norm();
  return best;
}

}  // namespace

CheckReport reversibility_check(const MetricField& field,
                                const std::vector<std::pair<Vec3, Vec3>>& samples, double T,
                                double tol, const TraceOptions& options) {
  if (samples.empty()) throw InputError("reversibility_check: no samples");
  CheckReport rep;
  rep.check = "reversibility";
  rep.inputs = {{"field", field.description()}, {"T", T}, {"samples", samples.size()}};
  std::vector<double> dist(samples.size(), 0.0);
  parallel_for(samples.size(), default_jobs(), [&](std::size_t k) {
    const auto& [x, v] = samples[k];
    const auto fwd = geodesic_trace(field, x, v, T, options);
    // The return trace may overshoot the start; extend the forward geodesic
    // into the past so the overshoot is still compared against it.
    const auto past = geodesic_trace(field, x, v, -0.5 * T, options);
    std::vector<Vec3> line;
    for (auto it = past.states.rbegin(); it != past.states.rend(); ++it) line.push_back(it->x);
    for (std::size_t i = 1; i < fwd.states.size(); ++i) line.push_back(fwd.states[i].x);
    const auto& end = fwd.states.back();
    const auto back = geodesic_trace(field, end.x, -end.v, T, options);
    double worst = 0.0;
    for (const auto& st : back.states) worst = std::max(worst, distance_to_polyline(st.x, line));
    dist[k] = worst;
  });
  double worst = 0.0;
  for (std::size_t k = 0; k < dist.size(); ++k) {
    worst = std::max(worst, dist[k]);
    rep.values["distance_" + std::to_string(k)] = dist[k];
  }
  rep.add("max_distance", worst, tol);
  rep.finalize();
  return rep;
}

TransversalPatch TransversalPatch::meridian(double half_length, double dir_lo, double dir_hi,
                                            int n) {
  TransversalPatch p;
  p.state = [](double s1, double s2) -> std::pair<Vec3, Vec3> {
    const Vec3 x(std::cos(s1), 0.0, std::sin(s1));
    const Vec3 t(-std::sin(s1), 0.0, std::cos(s1));
    return {x, std::cos(s2) * t + std::sin(s2) * Vec3::UnitY()};
  };
  p.s1_lo = -half_length;
  p.s1_hi = half_length;
  p.s2_lo = dir_lo;
  p.s2_hi = dir_hi;
  p.n1 = n;
  p.n2 = n;
  return p;
}

SampledPatch sample_patch(const MetricField& field, const TransversalPatch& patch) {
  if (patch.n1 < 2 || patch.n2 < 2) throw InputError("sample_patch: need at least 2x2 nodes");
  SampledPatch sp;
  sp.n1 = patch.n1;
  sp.n2 = patch.n2;
  sp.h1 = (patch.s1_hi - patch.s1_lo) / (patch.n1 - 1);
  sp.h2 = (patch.s2_hi - patch.s2_lo) / (patch.n2 - 1);
  const std::size_t total = static_cast<std::size_t>(sp.rows() * sp.cols());
  sp.x.resize(total);
  sp.v.resize(total);
  for (int i = -2; i < sp.n1 + 2; ++i) {
    for (int j = -2; j < sp.n2 + 2; ++j) {
      auto [x, d] = patch.state(patch.s1_lo + i * sp.h1, patch.s2_lo + j * sp.h2);
      if (field.on_sphere()) {
        x.normalize();
        d -= d.dot(x) * x;
      }
      const double f = field(x, d);
      if (!(f > 0.0)) throw InputError("sample_patch: degenerate direction");
      sp.x[sp.index(i, j)] = x;
      sp.v[sp.index(i, j)] = d / f;
    }
  }
  return sp;
}

SampledPatch flow_patch(const MetricField& field, const SampledPatch& patch, double t,
                        const TraceOptions& options) {
  SampledPatch out = patch;
  TraceOptions opt = options;
  opt.samples = 1;
  parallel_for(patch.x.size(), default_jobs(), [&](std::size_t k) {
    const auto traj = geodesic_trace(field, patch.x[k], patch.v[k], t, opt);
    if (traj.hit_boundary) throw InputError("flow_patch: trajectory left the chart");
    out.x[k] = traj.states.back().x;
    out.v[k] = traj.states.back().v;
  });
  return out;
}

PatchForm section_symplectic_form(const MetricField& field, const SampledPatch& patch,
                                  double min_margin) {
  std::vector<Vec3> xi(patch.x.size());
  parallel_for(patch.x.size(), default_jobs(),
               [&](std::size_t k) { xi[k] = hilbert_form(field, patch.x[k], patch.v[k]); });
  auto d = [&](const std::vector<Vec3>& f, int i, int j, int axis) -> Vec3 {
    const int di = axis == 0 ? 1 : 0;
    const int dj = axis == 1 ? 1 : 0;
    const double h = axis == 0 ? patch.h1 : patch.h2;
    return (-f[patch.index(i + 2 * di, j + 2 * dj)] + 8.0 * f[patch.index(i + di, j + dj)] -
            8.0 * f[patch.index(i - di, j - dj)] + f[patch.index(i - 2 * di, j - 2 * dj)]) /
           (12.0 * h);
  };
  PatchForm pf;
  pf.n1 = patch.n1;
  pf.n2 = patch.n2;
  pf.omega.resize(static_cast<std::size_t>(patch.n1 * patch.n2));
  pf.min_abs = std::numeric_limits<double>::infinity();
  pf.min_margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < patch.n1; ++i) {
    for (int j = 0; j < patch.n2; ++j) {
      const Vec3 x1 = d(patch.x, i, j, 0), x2 = d(patch.x, i, j, 1);
      const Vec3 p1 = d(xi, i, j, 0), p2 = d(xi, i, j, 1);
      const double w = p1.dot(x2) - p2.dot(x1);
      const double n1 = std::sqrt(x1.squaredNorm() + p1.squaredNorm());
      const double n2 = std::sqrt(x2.squaredNorm() + p2.squaredNorm());
      const double margin = n1 * n2 > 0.0 ? std::abs(w) / (n1 * n2) : 0.0;
      pf.omega[static_cast<std::size_t>(i * patch.n2 + j)] = w;
      pf.min_abs = std::min(pf.min_abs, std::abs(w));
      pf.max_abs = std::max(pf.max_abs, std::abs(w));
      pf.min_margin = std::min(pf.min_margin, margin);
    }
  }
  if (pf.min_margin < min_margin) {
    throw InputError("section_symplectic_form: transversality margin violated (" +
                     std::to_string(pf.min_margin) + ")");
  }
  return pf;
}

PatchForm section_symplectic_form(const MetricField& field, const TransversalPatch& patch,
                                  double min_margin) {
  return section_symplectic_form(field, sample_patch(field, patch), min_margin);
}

namespace {

std::vector<double> ratio(const MetricField& f1, const MetricField& f2, const SampledPatch& p) {
  // Both forms only depend on the footpoint and the direction, so one
  // sampling serves both fields.
  const PatchForm w1 = section_symplectic_form(f1, p, 0.0);
  const PatchForm w2 = section_symplectic_form(f2, p, 0.0);
  std::vector<double> nu(w1.omega.size());
  for (std::size_t k = 0; k < nu.size(); ++k) {
    if (std::abs(w1.omega[k]) < 1e-10) {
      throw InputError("motion_integral_ratio: degenerate patch (omega_F1 below 1e-10)");
    }
    nu[k] = w2.omega[k] / w1.omega[k];
  }
  return nu;
}

void summarize(MotionRatio& r) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  r.mean = compensated_sum(r.nu) / static_cast<double>(r.nu.size());
  for (double v : r.nu) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  r.spread = (hi - lo) / std::abs(r.mean);
}

}  // namespace

MotionRatio motion_integral_ratio(const MetricField& f1, const MetricField& f2,
                                  const SampledPatch& patch) {
  if (f1.dim() != 2 || f2.dim() != 2) throw InputError("motion_integral_ratio: needs n = 2");
  MotionRatio r;
  r.nu = ratio(f1, f2, patch);
  summarize(r);
  return r;
}

MotionRatio motion_integral_ratio_along_flow(const MetricField& f1, const MetricField& f2,
                                             const SampledPatch& patch,
                                             const std::vector<double>& times,
                                             const TraceOptions& options) {
  MotionRatio r = motion_integral_ratio(f1, f2, patch);
  std::vector<double> lo = r.nu, hi = r.nu;
  for (double t : times) {
    const auto nu = ratio(f1, f2, flow_patch(f1, patch, t, options));
    for (std::size_t k = 0; k < nu.size(); ++k) {
      lo[k] = std::min(lo[k], nu[k]);
      hi[k] = std::max(hi[k], nu[k]);
    }
  }
  r.flow_spread = 0.0;
  for (std::size_t k = 0; k < lo.size(); ++k) {
    r.flow_spread = std::max(r.flow_spread, (hi[k] - lo[k]) / std::abs(r.mean));
  }
  return r;
}

double prime_geodesic_length(const MetricField& field) {
  if (!field.is_busemann()) throw InputError("prime_geodesic_length: not a Busemann (Zoll) field");
  const CroftonDensity m(field.crofton_density(), {{"type", "field"}});
  return crofton_length(m, SphereCurve::great_circle(Vec3(0.2, 0.3, 0.93)).curve).length;
}

CheckReport santalo_check(const MetricField& field, int grid_level, double tol) {
  if (!field.on_sphere() || !field.is_busemann()) {
    throw InputError("santalo_check: needs a Zoll (Busemann) field on S^2");
  }
  CheckReport rep;
  rep.check = "santalo";
  rep.inputs = {{"field", field.description()}, {"grid_level", grid_level}};
  const double vol = ht_volume(field, WholeSphere{grid_level});
  const double ell = prime_geodesic_length(field);
  const double mass = integrate_sphere(sphere_grid(3, 5), field.crofton_density());
  rep.lhs = 2.0 * kPi * vol;
  rep.rhs = ell * 4.0 * mass;
  rep.values["volume"] = vol;
  rep.values["length"] = ell;
  rep.values["omega_mass"] = 4.0 * mass;
  rep.add("mismatch", std::abs(*rep.lhs - *rep.rhs) / std::abs(*rep.lhs), tol);
  rep.finalize();
  return rep;
}

CheckReport crofton_area_check(const MetricField& field, const ParametrizedCurve& curve,
                               double tol) {
  if (!field.on_sphere() || !field.is_busemann()) {
    throw InputError("crofton_area_check: needs a Busemann field on S^2");
  }
  CheckReport rep;
  rep.check = "crofton";
  rep.inputs = {{"field", field.description()}, {"curve", curve.name}};
  const double length = hypersurface_area(field, curve);
  const CroftonDensity m(field.crofton_density(), {{"type", "field"}});
  // (1 / (2 eps_1)) int # |omega| with |omega| = 4 m dsigma and eps_1 = 2.
  const CroftonLength count = crofton_length(m, curve);
  rep.lhs = length;
  rep.rhs = count.length;
  rep.values["crossings"] = static_cast<double>(count.crossings);
  rep.warnings = count.warnings;
  rep.add("mismatch", std::abs(length - count.length) / std::abs(length), tol);
  rep.finalize();
  return rep;
}

}  // namespace finsler
