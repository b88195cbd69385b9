// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "finsler/crofton.hpp"
#include "finsler/geodesic.hpp"
#include "finsler/rigidity.hpp"

using namespace finsler;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Detail {
 public:
  Detail& add(const std::string& name, double value) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s%s=%.3g", s_.empty() ? "" : " ", name.c_str(), value);
    s_ += buf;
    return *this;
  }
  Detail& note(const std::string& text) {
    s_ += (s_.empty() ? "" : " ") + text;
    return *this;
  }
  const std::string& str() const { return s_; }

 private:
  std::string s_;
};

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return Vec3(n(rng), n(rng), n(rng)).normalized();
}

Vec3 random_tangent(std::mt19937_64& rng, const Vec3& x) {
  Vec3 v = random_unit(rng);
  return (v - v.dot(x) * x).normalized();
}

CroftonDensity poly_density() { return CroftonDensity::poly({{0.25, 0, 0, 0}, {0.125, 0, 0, 2}}); }
CroftonDensity bump_density() { return perturbed_round_density(Vec3(0, 0, 1), 0.5, 0.2); }

struct NamedDensity {
  const char* name;
  CroftonDensity m;
};

std::vector<NamedDensity> densities() {
  return {{"round", CroftonDensity::constant(0.25)}, {"poly", poly_density()}, {"bump", bump_density()}};
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// 1
Outcome busemann_calibration() {
  const MetricField b = busemann_metric(CroftonDensity::constant(0.25));
  const MetricField r = round_metric();
  std::mt19937_64 rng(101);
  double fiber = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Vec3 x = random_unit(rng);
    for (int k = 0; k < 8; ++k) {
      const Vec3 v = random_tangent(rng, x) * (0.5 + 0.25 * k);
      fiber = std::max(fiber, std::abs(b(x, v) - r(x, v)));
    }
  }
  const double len = crofton_length(CroftonDensity::constant(0.25), SphereCurve::equator().curve).length;
  const double lr = rel(len, 2 * kPi);
  return {fiber < 1e-6 && lr < 1e-2, Detail().add("max_fiber_error", fiber).add("equator_rel_error", lr).str()};
}

// 2 and 3
Outcome zoll_identity(bool integer) {
  bool ok = true;
  Detail d;
  for (const auto& [name, m] : densities()) {
    const CheckReport r = zoll_volume_check(busemann_metric(m), 3);
    if (integer) {
      const double dev = std::abs(r.values.at("integer_ratio") - 2.0);
      ok = ok && dev < 0.05;
      d.add(std::string(name) + "_ratio", r.values.at("integer_ratio"));
    } else {
      const double res = r.residuals.at("volume_identity");
      ok = ok && res < 1e-2;
      d.add(std::string(name) + "_residual", res);
      if (std::string(name) == "poly") {
        const double pv = rel(r.values.at("volume"), 49 * kPi / 9);
        ok = ok && pv < 1e-2;
        d.add("poly_volume", r.values.at("volume"));
      }
    }
  }
  return {ok, d.str()};
}

// 4
Outcome projectivity() {
  std::mt19937_64 rng(104);
  double worst = 0.0;
  TraceOptions opt;
  opt.samples = 128;
  for (const auto& nd : densities()) {
    const MetricField f = busemann_metric(nd.m);
    for (int i = 0; i < 20; ++i) {
      const Vec3 x = random_unit(rng);
      const Vec3 v = random_tangent(rng, x);
      const Vec3 p0 = x.cross(v).normalized();
      for (const auto& s : geodesic_trace(f, x, v, 2 * kPi, opt).states) {
        worst = std::max(worst, std::abs(s.x.dot(p0)));
      }
    }
  }
  const MetricField funk = funk_ball(2);
  double straight = 0.0;
  std::uniform_real_distribution<double> u(-0.5, 0.5), a(0.0, 2 * kPi);
  for (int i = 0; i < 20; ++i) {
    const Vec3 x(u(rng), u(rng), 0.0);
    const double th = a(rng);
    const Vec3 d(std::cos(th), std::sin(th), 0.0);
    for (const auto& s : geodesic_trace(funk, x, d, 2.0, opt).states) {
      const Vec3 r = s.x - x;
      straight = std::max(straight, (r - r.dot(d) * d).norm());
    }
  }
  return {worst < 1e-5 && straight < 1e-6,
          Detail().add("max_great_circle_offset", worst).add("max_funk_offset", straight).str()};
}

// 5
Outcome reversible_plus_closed() {
  const OneFormField df = OneFormField::exact_linear(true, Vec3(0, 0, 0.2));
  const MetricField f = randers_sphere(df);
  const auto split = detect_reversible_plus_closed(f);
  std::mt19937_64 rng(105);
  std::vector<Vec3> pts;
  for (int i = 0; i < 40; ++i) pts.push_back(random_unit(rng));
  const Vec3 z(1, 0, 0);
  const auto rec = recover_potential(split.beta, z, pts);
  double pot = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    pot = std::max(pot, std::abs(rec.values[i] - 0.2 * (pts[i].z() - z.z())));
  }
  const auto audit = distance_asymmetry_audit(f, [](const Vec3& x) { return 0.2 * x.z(); }, 20, 7, 1e-4);
  const double asym = audit.residuals.begin()->second;
  const bool ok = split.max_linearity < 1e-6 && split.closedness < 1e-4 && pot < 1e-5 && asym < 1e-4;
  return {ok, Detail()
                  .add("linearity", split.max_linearity)
                  .add("closedness", split.closedness)
                  .add("potential_error", pot)
                  .add("distance_identity", asym)
                  .str()};
}

// 6
Outcome funk_negative_control() {
  const MetricField f = funk_ball(2);
  ReversiblePlusClosedOptions opt;
  for (int k = 0; k < 16; ++k) {
    const double t = 2 * kPi * k / 16;
    opt.nodes.push_back(0.5 * Vec3(std::cos(t), std::sin(t), 0.0));
  }
  const auto split = detect_reversible_plus_closed(f, opt);
  const auto control = detect_reversible_plus_closed(funk_field(superellipse_domain(4)), opt);
  return {split.max_linearity > 1e-2, Detail()
                                          .add("funk_ball_linearity", split.max_linearity)
                                          .add("superellipse_funk_linearity", control.max_linearity)
                                          .str()};
}

// 7
Outcome brunn_minkowski() {
  bool ok = true;
  double worst_violation = 0.0, sym_max = 0.0, asym_min = 1e300;
  for (const auto& c : brunn_minkowski_corpus(50, 11)) {
    const auto g = symmetrization_gap(c.body);
    worst_violation = std::max(worst_violation, g.volume - g.symmetral_volume);
    if (c.symmetric) {
      sym_max = std::max(sym_max, std::abs(g.relative_gap));
    } else {
      asym_min = std::min(asym_min, g.relative_gap);
    }
  }
  ok = worst_violation <= 1e-9 && sym_max < 1e-6 && asym_min > 1e-6;
  return {ok, Detail()
                  .add("max_violation", worst_violation)
                  .add("symmetric_max_gap", sym_max)
                  .add("asymmetric_min_gap", asym_min)
                  .str()};
}

// 8
Outcome blaschke() {
  const ConvexBody t = regular_tetrahedron();
  const BlaschkeResult r = blaschke_body(t);
  std::mt19937_64 rng(108);
  double err = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Vec3 u = random_unit(rng);
    err = std::max(err, rel(brightness(r.body, u), brightness(t, u)));
  }
  const double vb = volume(r.body), vt = volume(t);
  return {err < 1e-3 && vb >= vt && r.iterations < 5000, Detail()
                                                             .add("brightness_rel_error", err)
                                                             .add("volume", vb)
                                                             .add("tetrahedron_volume", vt)
                                                             .add("iterations", r.iterations)
                                                             .str()};
}

// 9
Outcome chakerian() {
  std::mt19937_64 rng(109);
  std::uniform_real_distribution<double> ax(0.5, 1.2), sc(0.3, 2.0), tr(-0.5, 0.5);
  double worst_pass = 0.0;
  int passed = 0;
  for (int i = 0; i < 10; ++i) {
    const Vec3 axes(ax(rng), ax(rng), ax(rng));
    const ConvexBody gauge = i % 2 == 0 ? ConvexBody::ellipsoid(3, axes) : ConvexBody::box(3, axes);
    const ConvexBody k = gauge.scaled(sc(rng)).translated(Vec3(tr(rng), tr(rng), tr(rng)));
    const CheckReport r = chakerian_check(k, gauge);
    for (const auto& [name, v] : r.residuals) worst_pass = std::max(worst_pass, v);
    passed += r.pass() ? 1 : 0;
  }
  const ConvexBody ball = ConvexBody::ball(3);
  const CheckReport reu = chakerian_check(rotated_reuleaux(), ball);
  const CheckReport cb = chakerian_check(constant_brightness_body(), ball);
  const double reu_b = reu.residuals.at("brightness");
  const double cb_w = cb.residuals.at("width");
  const bool ok = passed == 10 && worst_pass < 1e-5 && !reu.pass() && !cb.pass() && reu_b > 1e-2 && cb_w > 1e-2;
  return {ok, Detail()
                  .add("instances_passed", passed)
                  .add("max_instance_residual", worst_pass)
                  .add("reuleaux_brightness", reu_b)
                  .add("constant_brightness_width", cb_w)
                  .str()};
}

// 10
Outcome motion_ratio() {
  const MetricField r = round_metric();
  const SampledPatch p = sample_patch(r, TransversalPatch::meridian(0.3, 0.6, 1.2, 20));
  const MotionRatio scaled = motion_integral_ratio(r, scale_field(1.7, r), p);
  double es = 0.0;
  for (double nu : scaled.nu) es = std::max(es, std::abs(nu - 1.7));
  const MotionRatio exact =
      motion_integral_ratio(r, add_one_form(r, OneFormField::exact_linear(true, Vec3(0, 0, 0.2))), p);
  double ee = 0.0;
  for (double nu : exact.nu) ee = std::max(ee, std::abs(nu - 1.0));
  const MetricField bump = busemann_metric(bump_density());
  // The spread is a stencil truncation error of order h^4; 30 nodes per side
  // put it well below the bound (20 gives about 1.4e-4).
  const SampledPatch pb = sample_patch(r, TransversalPatch::meridian(0.3, 0.6, 1.2, 30));
  const MotionRatio flow = motion_integral_ratio_along_flow(r, bump, pb, {0.35, 0.7});
  return {es < 1e-4 && ee < 1e-5 && flow.flow_spread < 1e-4, Detail()
                                                                 .add("scaled_max_dev", es)
                                                                 .add("exact_max_dev", ee)
                                                                 .add("round_bump_flow_spread", flow.flow_spread)
                                                                 .str()};
}

// 11
Outcome santalo_crofton() {
  bool ok = true;
  Detail d;
  const CroftonDensity ms[] = {CroftonDensity::constant(0.25), bump_density()};
  const char* names[] = {"round", "bump"};
  for (int i = 0; i < 2; ++i) {
    const MetricField f = busemann_metric(ms[i]);
    const CheckReport s = santalo_check(f, 3);
    const CheckReport c = crofton_area_check(f, SphereCurve::latitude(40).curve);
    const double sr = s.residuals.begin()->second, cr = c.residuals.begin()->second;
    ok = ok && sr < 1e-2 && cr < 1e-2;
    d.add(std::string(names[i]) + "_santalo", sr).add(std::string(names[i]) + "_crofton", cr);
    if (i == 0) {
      const double l = rel(*s.lhs, 8 * kPi * kPi), r = rel(*s.rhs, 8 * kPi * kPi);
      ok = ok && l < 1e-2 && r < 1e-2;
      d.add("round_lhs", *s.lhs).add("round_rhs", *s.rhs);
    }
  }
  return {ok, d.str()};
}

// 12
Outcome transversal() {
  const MetricField b = busemann_metric(bump_density());
  const SampledPatch p = sample_patch(b, TransversalPatch::meridian(0.3, 0.6, 1.2, 20));
  const PatchForm w0 = section_symplectic_form(b, p);
  const PatchForm w1 = section_symplectic_form(b, flow_patch(b, p, 0.7));
  double worst = 0.0;
  for (std::size_t k = 0; k < w0.omega.size(); ++k) worst = std::max(worst, rel(w1.omega[k], w0.omega[k]));
  return {worst < 1e-4, Detail().add("max_rel_change", worst).add("min_margin", w0.min_margin).str()};
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;  ///< 0: no runtime bound
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "busemann calibration", 10, busemann_calibration},
      {2, "volume identity V = l^2/pi", 120, [] { return zoll_identity(false); }},
      {3, "zoll integer", 0, [] { return zoll_identity(true); }},
      {4, "projectivity", 60, projectivity},
      {5, "reversible plus closed form", 0, reversible_plus_closed},
      {6, "funk ball negative control", 0, funk_negative_control},
      {7, "fiberwise brunn-minkowski", 0, brunn_minkowski},
      {8, "blaschke body of tetrahedron", 60, blaschke},
      {9, "chakerian checker", 0, chakerian},
      {10, "integral of motion ratio", 0, motion_ratio},
      {11, "santalo and crofton", 0, santalo_crofton},
      {12, "transversal patch flow", 0, transversal},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0 && secs > c.budget_seconds) {
      o.pass = false;
      o.detail += " over_budget";
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %2d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed;
}
