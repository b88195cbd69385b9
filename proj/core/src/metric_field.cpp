#include "finsler/metric_field.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "finsler/error.hpp"

namespace finsler {

namespace {

Vec3 tangential(const Vec3& x, const Vec3& v) { return v - v.dot(x) * x; }

std::string describe_point(const Vec3& x) {
  std::ostringstream os;
  os.precision(6);
  os << "(" << x.x() << ", " << x.y() << ", " << x.z() << ")";
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// OneFormField

OneFormField::OneFormField(bool on_sphere, Covector covector, std::string name,
                           Potential potential)
    : on_sphere_(on_sphere),
      covector_(std::move(covector)),
      name_(std::move(name)),
      potential_(std::move(potential)) {
  if (!covector_) throw InputError("OneFormField: null covector");
}

OneFormField OneFormField::exact_linear(bool on_sphere, const Vec3& g) {
  return OneFormField(
      on_sphere, [g](const Vec3&) { return g; }, "d(linear)",
      [g](const Vec3& x) { return g.dot(x); });
}

OneFormField OneFormField::rotation(const Vec3& axis, double scale) {
  const Vec3 a = axis.normalized();
  return OneFormField(
      true, [a, scale](const Vec3& x) -> Vec3 { return scale * a.cross(x); }, "rotation");
}

OneFormField OneFormField::constant(const Vec3& c) {
  return OneFormField(
      false, [c](const Vec3&) { return c; }, "constant", [c](const Vec3& x) { return c.dot(x); });
}

OneFormField OneFormField::zero(bool on_sphere) {
  return OneFormField(
      on_sphere, [](const Vec3&) -> Vec3 { return Vec3::Zero(); }, "zero",
      [](const Vec3&) { return 0.0; });
}

double OneFormField::potential(const Vec3& x) const {
  if (!potential_) throw InputError("OneFormField: no potential for " + name_);
  return potential_(x);
}

Vec3 OneFormField::covector(const Vec3& x) const {
  if (!covector_) throw InputError("OneFormField: empty form");
  const Vec3 c = covector_(x);
  return on_sphere_ ? tangential(x, c) : c;
}

double OneFormField::operator()(const Vec3& x, const Vec3& v) const { return covector(x).dot(v); }

OneFormField OneFormField::scaled(double c) const {
  auto cov = covector_;
  Potential pot;
  if (potential_) {
    auto p = potential_;
    pot = [p, c](const Vec3& x) { return c * p(x); };
  }
  return OneFormField(
      on_sphere_, [cov, c](const Vec3& x) -> Vec3 { return c * cov(x); }, name_, pot);
}

// ---------------------------------------------------------------------------
// MetricField

struct MetricField::State {
  bool sphere = false;
  int dim = 2;
  Fiber fiber;
  std::string family;
  Options opt;
};

const MetricField::State& MetricField::state() const {
  if (!state_) throw InputError("MetricField: empty field");
  return *state_;
}

MetricField MetricField::chart(int dim, Fiber fiber, std::string family, Options options) {
  if (dim != 2 && dim != 3) throw InputError("MetricField: chart dimension must be 2 or 3");
  if (!fiber) throw InputError("MetricField: null fiber");
  auto s = std::make_shared<State>();
  s->sphere = false;
  s->dim = dim;
  s->fiber = std::move(fiber);
  s->family = std::move(family);
  s->opt = std::move(options);
  if (s->opt.description.is_null()) s->opt.description = {{"family", s->family}};
  MetricField f;
  f.state_ = std::move(s);
  return f;
}

MetricField MetricField::sphere(Fiber fiber, std::string family, Options options) {
  if (!fiber) throw InputError("MetricField: null fiber");
  auto s = std::make_shared<State>();
  s->sphere = true;
  s->dim = 2;
  s->fiber = std::move(fiber);
  s->family = std::move(family);
  s->opt = std::move(options);
  if (s->opt.description.is_null()) s->opt.description = {{"family", s->family}};
  MetricField f;
  f.state_ = std::move(s);
  return f;
}

bool MetricField::on_sphere() const { return state().sphere; }
int MetricField::dim() const { return state().dim; }
const std::string& MetricField::family() const { return state().family; }
const nlohmann::json& MetricField::description() const { return state().opt.description; }
bool MetricField::is_reversible() const { return state().opt.reversible; }

bool MetricField::contains(const Vec3& x) const {
  const State& s = state();
  if (!x.allFinite()) return false;
  if (s.sphere) return std::abs(x.norm() - 1.0) < 1e-9;
  if (s.dim == 2 && x.z() != 0.0) return false;
  if (x.cwiseAbs().maxCoeff() > s.opt.extent) return false;
  return !s.opt.inside || s.opt.inside(x);
}

double MetricField::extent() const { return state().sphere ? 1.0 : state().opt.extent; }

double MetricField::boundary_margin(const Vec3& x) const {
  const State& s = state();
  if (s.opt.boundary_margin) return s.opt.boundary_margin(x);
  return std::numeric_limits<double>::infinity();
}

double MetricField::operator()(const Vec3& x, const Vec3& v) const {
  const State& s = state();
  if (s.sphere) return s.fiber(x, tangential(x, v));
  return s.fiber(x, v);
}

std::array<Vec3, 3> MetricField::frame(const Vec3& x) const {
  if (on_sphere()) {
    const auto [e1, e2] = tangent_frame(x);
    return {e1, e2, x};
  }
  return {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
}

Vec3 MetricField::from_frame(const Vec3& x, const Vec3& u) const {
  if (!on_sphere()) return dim() == 2 ? Vec3(u.x(), u.y(), 0.0) : u;
  const auto f = frame(x);
  return u.x() * f[0] + u.y() * f[1];
}

Vec3 MetricField::to_frame(const Vec3& x, const Vec3& w) const {
  if (!on_sphere()) return dim() == 2 ? Vec3(w.x(), w.y(), 0.0) : w;
  const auto f = frame(x);
  return Vec3(w.dot(f[0]), w.dot(f[1]), 0.0);
}

Vec3 MetricField::gradient(const Vec3& x, const Vec3& v) const {
  const State& s = state();
  if (v.norm() == 0.0) throw InputError("MetricField::gradient: zero vector");
  if (s.opt.gradient) {
    const Vec3 g = s.opt.gradient(x, v);
    return s.sphere ? tangential(x, g) : g;
  }
  const auto f = frame(x);
  const Vec3 u = (s.sphere ? tangential(x, v) : v).normalized();
  const double h = 1e-3;
  Vec3 g = Vec3::Zero();
  for (int i = 0; i < s.dim; ++i) {
    const Vec3& e = f[static_cast<std::size_t>(i)];
    auto F = [&](double t) { return s.fiber(x, u + t * e); };
    const double d = (-F(2 * h) + 8 * F(h) - 8 * F(-h) + F(-2 * h)) / (12 * h);
    g += d * e;
  }
  return g;
}

MinkowskiNorm MetricField::norm_at(const Vec3& x) const {
  const State& s = state();
  if (s.opt.norm_factory) return s.opt.norm_factory(x);
  auto self = *this;
  MinkowskiNorm::GradFn grad;
  if (s.opt.gradient) {
    grad = [self, x](const Vec3& u) -> Vec3 {
      return self.to_frame(x, self.gradient(x, self.from_frame(x, u)));
    };
  }
  return MinkowskiNorm(
      s.dim, [self, x](const Vec3& u) { return self(x, self.from_frame(x, u)); }, s.family,
      grad);
}

const std::function<double(const Vec3&)>& MetricField::crofton_density() const {
  return state().opt.crofton_density;
}

bool MetricField::is_busemann() const { return static_cast<bool>(state().opt.crofton_density); }

// ---------------------------------------------------------------------------
// Families

MetricField round_metric(double radius) {
  if (!(radius > 0.0)) throw InputError("round_metric: radius must be positive");
  MetricField::Options o;
  o.gradient = [radius](const Vec3&, const Vec3& v) -> Vec3 { return radius * v.normalized(); };
  o.norm_factory = [radius](const Vec3&) { return MinkowskiNorm::euclidean(2).scaled(radius); };
  o.crofton_density = [radius](const Vec3&) { return 0.25 * radius; };
  o.description = {{"family", "round"}, {"radius", radius}};
  o.reversible = true;
  return MetricField::sphere([radius](const Vec3&, const Vec3& v) { return radius * v.norm(); },
                             "round", std::move(o));
}

MetricField euclidean_field(int dim, double half_width) {
  MetricField::Options o;
  o.gradient = [](const Vec3&, const Vec3& v) -> Vec3 { return v.normalized(); };
  o.norm_factory = [dim](const Vec3&) { return MinkowskiNorm::euclidean(dim); };
  o.extent = half_width;
  o.description = {{"family", "euclidean"}, {"dim", dim}, {"half_width", half_width}};
  o.reversible = true;
  return MetricField::chart(dim, [](const Vec3&, const Vec3& v) { return v.norm(); }, "euclidean",
                            std::move(o));
}

MetricField funk_ball(int dim) {
  MetricField::Options o;
  o.inside = [](const Vec3& x) { return x.squaredNorm() < 1.0; };
  o.boundary_margin = [](const Vec3& x) { return 1.0 - x.norm(); };
  o.gradient = [](const Vec3& x, const Vec3& v) -> Vec3 {
    const double c = 1.0 - x.squaredNorm();
    const double a = x.dot(v);
    const double q = std::sqrt(a * a + c * v.squaredNorm());
    return (x + (a * x + c * v) / q) / c;
  };
  o.description = {{"family", "funk_ball"}, {"dim", dim}};
  return MetricField::chart(
      dim,
      [](const Vec3& x, const Vec3& v) {
        const double c = 1.0 - x.squaredNorm();
        const double a = x.dot(v);
        return (a + std::sqrt(a * a + c * v.squaredNorm())) / c;
      },
      "funk_ball", std::move(o));
}

MetricField hilbert_ball(int dim) {
  const MetricField funk = funk_ball(dim);
  MetricField h = average_field(funk, reverse_field(funk));
  MetricField::Options o;
  o.inside = [](const Vec3& x) { return x.squaredNorm() < 1.0; };
  o.boundary_margin = [](const Vec3& x) { return 1.0 - x.norm(); };
  o.gradient = [h](const Vec3& x, const Vec3& v) { return h.gradient(x, v); };
  o.description = {{"family", "hilbert_ball"}, {"dim", dim}};
  o.reversible = true;
  return MetricField::chart(
      dim, [h](const Vec3& x, const Vec3& v) { return h(x, v); }, "hilbert_ball", std::move(o));
}

ConvexDomain superellipse_domain(double exponent) {
  if (!(exponent >= 1.0)) throw InputError("superellipse_domain: exponent must be >= 1");
  ConvexDomain d;
  d.gauge = [exponent](const Vec3& x) {
    return std::pow(std::pow(std::abs(x.x()), exponent) + std::pow(std::abs(x.y()), exponent) +
                        std::pow(std::abs(x.z()), exponent),
                    1.0 / exponent);
  };
  d.radius = std::pow(3.0, 0.5 - 1.0 / exponent);
  d.name = "superellipse";
  return d;
}

ConvexDomain ball_domain() {
  ConvexDomain d;
  d.gauge = [](const Vec3& x) { return x.norm(); };
  d.radius = 1.0;
  d.name = "ball";
  return d;
}

namespace {

// 1 / sup{t : gauge(x + t v) < 1}.
double funk_ray(const ConvexDomain& dom, const Vec3& x, const Vec3& v) {
  const double speed = v.norm();
  if (speed == 0.0) return 0.0;
  double hi = 2.5 * dom.radius / speed;
  auto f = [&](double t) { return dom.gauge(x + t * v) - 1.0; };
  if (!(f(0.0) < 0.0)) throw InputError("funk_field: point outside the domain");
  boost::math::tools::eps_tolerance<double> tol(40);
  const auto r = boost::math::tools::bisect(f, 0.0, hi, tol);
  return 1.0 / (0.5 * (r.first + r.second));
}

}  // namespace

MetricField funk_field(const ConvexDomain& domain, int dim) {
  if (!domain.gauge) throw InputError("funk_field: domain without gauge");
  MetricField::Options o;
  o.inside = [domain](const Vec3& x) { return domain.gauge(x) < 1.0; };
  o.boundary_margin = [domain](const Vec3& x) { return 1.0 - domain.gauge(x); };
  o.extent = domain.radius;
  o.description = {{"family", "funk"}, {"domain", domain.name}, {"dim", dim}};
  return MetricField::chart(
      dim, [domain](const Vec3& x, const Vec3& v) { return funk_ray(domain, x, v); },
      "funk(" + domain.name + ")", std::move(o));
}

MetricField hilbert_field(const ConvexDomain& domain, int dim) {
  if (!domain.gauge) throw InputError("hilbert_field: domain without gauge");
  MetricField::Options o;
  o.inside = [domain](const Vec3& x) { return domain.gauge(x) < 1.0; };
  o.boundary_margin = [domain](const Vec3& x) { return 1.0 - domain.gauge(x); };
  o.extent = domain.radius;
  o.description = {{"family", "hilbert"}, {"domain", domain.name}, {"dim", dim}};
  o.reversible = true;
  return MetricField::chart(
      dim,
      [domain](const Vec3& x, const Vec3& v) {
        return 0.5 * (funk_ray(domain, x, v) + funk_ray(domain, x, -v));
      },
      "hilbert(" + domain.name + ")", std::move(o));
}

MetricField randers_chart(int dim, const Eigen::Matrix3d& g, const OneFormField& beta,
                          double half_width) {
  Eigen::Matrix3d G = g;
  if (dim == 2) {
    G.row(2).setZero();
    G.col(2).setZero();
  }
  MetricField::Options base;
  base.gradient = [G](const Vec3&, const Vec3& v) -> Vec3 {
    return G * v / std::sqrt(v.dot(G * v));
  };
  base.extent = half_width;
  base.reversible = true;
  base.description = {{"family", "quadratic"}, {"dim", dim}};
  MetricField quad = MetricField::chart(
      dim, [G](const Vec3&, const Vec3& v) { return std::sqrt(std::max(0.0, v.dot(G * v))); },
      "quadratic", std::move(base));
  return add_one_form(quad, beta);
}

MetricField randers_sphere(const OneFormField& beta) {
  if (!beta.on_sphere()) throw InputError("randers_sphere: 1-form must live on the sphere");
  return add_one_form(round_metric(1.0), beta);
}

std::vector<Vec3> sample_base_points(const MetricField& field, int count) {
  if (field.on_sphere()) return quasi_random_directions(3, count);
  std::vector<Vec3> out;
  const int dim = field.dim();
  const double ext = field.extent();
  // Halton points in the box, kept when inside the chart.
  auto halton = [](int i, int base) {
    double f = 1.0, r = 0.0;
    while (i > 0) {
      f /= base;
      r += f * (i % base);
      i /= base;
    }
    return r;
  };
  for (int i = 1; static_cast<int>(out.size()) < count && i < 100 * count; ++i) {
    Vec3 x(halton(i, 2), halton(i, 3), dim == 3 ? halton(i, 5) : 0.5);
    x = (2.0 * x - Vec3::Ones()) * 0.95 * std::min(ext, 10.0);
    if (dim == 2) x.z() = 0.0;
    if (field.contains(x)) out.push_back(x);
  }
  return out;
}

MetricField add_one_form(const MetricField& field, const OneFormField& beta) {
  if (beta.on_sphere() != field.on_sphere()) {
    throw InputError("add_one_form: 1-form and field live on different bases");
  }
  // Positivity of F + beta on sampled unit vectors.
  double worst = std::numeric_limits<double>::infinity();
  Vec3 wx = Vec3::Zero(), wv = Vec3::Zero();
  for (const Vec3& x : sample_base_points(field, 64)) {
    for (const Vec3& u : quasi_random_directions(field.dim(), 64)) {
      const Vec3 v = field.from_frame(x, u);
      const double val = field(x, v) + beta(x, v);
      if (val < worst) {
        worst = val;
        wx = x;
        wv = v;
      }
    }
  }
  if (!(worst > 0.0)) {
    throw InputError("add_one_form: F + beta is not positive at x = " + describe_point(wx) +
                     ", v = " + describe_point(wv));
  }
  MetricField::Options o;
  o.gradient = [field, beta](const Vec3& x, const Vec3& v) -> Vec3 {
    return field.gradient(x, v) + beta.covector(x);
  };
  o.norm_factory = [field, beta](const Vec3& x) {
    return field.norm_at(x).plus_linear(field.to_frame(x, beta.covector(x)));
  };
  o.inside = [field](const Vec3& x) { return field.contains(x); };
  o.boundary_margin = [field](const Vec3& x) { return field.boundary_margin(x); };
  o.extent = field.extent();
  o.description = {{"family", "plus_one_form"},
                   {"base", field.description()},
                   {"one_form", beta.name()}};
  auto fiber = [field, beta](const Vec3& x, const Vec3& v) { return field(x, v) + beta(x, v); };
  const std::string name = field.family() + "+" + beta.name();
  return field.on_sphere() ? MetricField::sphere(fiber, name, std::move(o))
                           : MetricField::chart(field.dim(), fiber, name, std::move(o));
}

namespace {

MetricField derived(const MetricField& base, MetricField::Fiber fiber, std::string name,
                    MetricField::Options o) {
  o.inside = [base](const Vec3& x) { return base.contains(x); };
  o.boundary_margin = [base](const Vec3& x) { return base.boundary_margin(x); };
  o.extent = base.extent();
  return base.on_sphere() ? MetricField::sphere(std::move(fiber), std::move(name), std::move(o))
                          : MetricField::chart(base.dim(), std::move(fiber), std::move(name),
                                               std::move(o));
}

}  // namespace

MetricField reverse_field(const MetricField& field) {
  MetricField::Options o;
  o.gradient = [field](const Vec3& x, const Vec3& v) -> Vec3 { return -field.gradient(x, -v); };
  o.norm_factory = [field](const Vec3& x) { return field.norm_at(x).reversed(); };
  o.crofton_density = field.crofton_density();
  o.reversible = field.is_reversible();
  o.description = {{"family", "reversed"}, {"base", field.description()}};
  return derived(
      field, [field](const Vec3& x, const Vec3& v) { return field(x, -v); },
      "reversed(" + field.family() + ")", std::move(o));
}

MetricField central_symmetrization_field(const MetricField& field) {
  MetricField::Options o;
  o.gradient = [field](const Vec3& x, const Vec3& v) -> Vec3 {
    return 0.5 * (field.gradient(x, v) - field.gradient(x, -v));
  };
  o.norm_factory = [field](const Vec3& x) { return odd_even_split(field.norm_at(x)).even; };
  o.crofton_density = field.crofton_density();
  o.reversible = true;
  o.description = {{"family", "symmetrized"}, {"base", field.description()}};
  return derived(
      field,
      [field](const Vec3& x, const Vec3& v) { return 0.5 * (field(x, v) + field(x, -v)); },
      "symmetrized(" + field.family() + ")", std::move(o));
}

MetricField scale_field(double c, const MetricField& field) {
  if (!(c > 0.0)) throw InputError("scale_field: factor must be positive");
  MetricField::Options o;
  o.gradient = [field, c](const Vec3& x, const Vec3& v) -> Vec3 {
    return c * field.gradient(x, v);
  };
  o.norm_factory = [field, c](const Vec3& x) { return field.norm_at(x).scaled(c); };
  if (field.is_busemann()) {
    auto m = field.crofton_density();
    o.crofton_density = [m, c](const Vec3& p) { return c * m(p); };
  }
  o.reversible = field.is_reversible();
  o.description = {{"family", "scaled"}, {"factor", c}, {"base", field.description()}};
  return derived(
      field, [field, c](const Vec3& x, const Vec3& v) { return c * field(x, v); },
      "scaled(" + field.family() + ")", std::move(o));
}

MetricField average_field(const MetricField& a, const MetricField& b) {
  if (a.on_sphere() != b.on_sphere() || a.dim() != b.dim()) {
    throw InputError("average_field: fields live on different bases");
  }
  MetricField::Options o;
  o.gradient = [a, b](const Vec3& x, const Vec3& v) -> Vec3 {
    return 0.5 * (a.gradient(x, v) + b.gradient(x, v));
  };
  o.norm_factory = [a, b](const Vec3& x) {
    auto fa = a.norm_at(x);
    auto fb = b.norm_at(x);
    return MinkowskiNorm(
        fa.dim(), [fa, fb](const Vec3& u) { return 0.5 * (fa(u) + fb(u)); }, "average",
        [fa, fb](const Vec3& u) -> Vec3 { return 0.5 * (fa.gradient(u) + fb.gradient(u)); });
  };
  if (a.is_busemann() && b.is_busemann()) {
    auto ma = a.crofton_density();
    auto mb = b.crofton_density();
    o.crofton_density = [ma, mb](const Vec3& p) { return 0.5 * (ma(p) + mb(p)); };
  }
  o.reversible = a.is_reversible() && b.is_reversible();
  o.description = {{"family", "average"}, {"first", a.description()}, {"second", b.description()}};
  MetricField::Fiber fiber = [a, b](const Vec3& x, const Vec3& v) {
    return 0.5 * (a(x, v) + b(x, v));
  };
  o.inside = [a, b](const Vec3& x) { return a.contains(x) && b.contains(x); };
  o.boundary_margin = [a, b](const Vec3& x) {
    return std::min(a.boundary_margin(x), b.boundary_margin(x));
  };
  o.extent = std::min(a.extent(), b.extent());
  const std::string name = "average(" + a.family() + "," + b.family() + ")";
  return a.on_sphere() ? MetricField::sphere(fiber, name, std::move(o))
                       : MetricField::chart(a.dim(), fiber, name, std::move(o));
}

MetricField areal_symmetrization_field(const MetricField& field, const MinkowskiOptions& options) {
  if (field.on_sphere() || field.dim() == 2) {
    // Planar fibers: edge-length measures add under Minkowski sum, so the
    // Blaschke body is the central symmetral.
    return central_symmetrization_field(field);
  }
  struct Cache {
    std::mutex mutex;
    std::map<std::array<double, 3>, ConvexBody> bodies;
  };
  auto cache = std::make_shared<Cache>();
  auto body_at = [field, options, cache](const Vec3& x) -> ConvexBody {
    const std::array<double, 3> key{x.x(), x.y(), x.z()};
    {
      std::lock_guard<std::mutex> lock(cache->mutex);
      auto it = cache->bodies.find(key);
      if (it != cache->bodies.end()) return it->second;
    }
    ConvexBody b;
    try {
      b = blaschke_body(codisc(field, x), options).body;
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(std::string(e.what()) + " at x = " + describe_point(x),
                             e.residual_history());
    }
    std::lock_guard<std::mutex> lock(cache->mutex);
    cache->bodies.emplace(key, b);
    return b;
  };
  MetricField::Options o;
  o.norm_factory = [body_at](const Vec3& x) { return MinkowskiNorm::support_of(body_at(x)); };
  o.reversible = true;
  o.description = {{"family", "areal_symmetrization"}, {"base", field.description()}};
  return derived(
      field, [body_at](const Vec3& x, const Vec3& v) { return body_at(x).support(v); },
      "areal(" + field.family() + ")", std::move(o));
}

// ---------------------------------------------------------------------------
// Densities

ConvexBody codisc(const MetricField& field, const Vec3& x, int grid_level) {
  if (!field.contains(x)) throw InputError("codisc: point outside the base, x = " + describe_point(x));
  return codisc(field.norm_at(x), grid_level);
}

double ht_volume_density(const MetricField& field, const Vec3& x, int grid_level) {
  return volume(codisc(field, x, grid_level)) / unit_ball_volume(field.dim());
}

std::vector<double> ht_density_samples(const MetricField& field, const DirectionGrid& grid,
                                       int codisc_level) {
  if (!field.on_sphere()) throw InputError("ht_density_samples: sphere field required");
  std::vector<double> out(grid.size());
  parallel_for(grid.size(), default_jobs(), [&](std::size_t i) {
    out[i] = ht_volume_density(field, grid.nodes[i], codisc_level);
  });
  return out;
}

double ht_volume(const MetricField& field, const Region& region) {
  if (const auto* ws = std::get_if<WholeSphere>(&region)) {
    if (!field.on_sphere()) throw InputError("ht_volume: whole-sphere region needs a sphere field");
    const DirectionGrid& grid = sphere_grid(3, ws->level);
    return integrate_sphere_samples(grid, ht_density_samples(field, grid));
  }
  if (field.on_sphere()) throw InputError("ht_volume: chart region given for a sphere field");
  const int n = field.dim();
  std::vector<Vec3> nodes;
  std::vector<double> weights;
  if (const auto* box = std::get_if<BoxRegion>(&region)) {
    const GaussRule& g = gauss_legendre(box->order);
    const int m = static_cast<int>(g.nodes.size());
    const int kmax = n == 3 ? m : 1;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        for (int k = 0; k < kmax; ++k) {
          Vec3 x = Vec3::Zero();
          double w = 1.0;
          const int idx[3] = {i, j, k};
          for (int d = 0; d < n; ++d) {
            const double half = 0.5 * (box->hi[d] - box->lo[d]);
            x[d] = box->lo[d] + half * (1.0 + g.nodes[static_cast<std::size_t>(idx[d])]);
            w *= half * g.weights[static_cast<std::size_t>(idx[d])];
          }
          nodes.push_back(x);
          weights.push_back(w);
        }
      }
    }
  } else {
    const auto& ball = std::get<BallRegion>(region);
    const GaussRule& g = gauss_legendre(ball.order);
    const DirectionGrid& dirs = n == 2 ? sphere_grid(2, 0) : sphere_grid(3, 2);
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      const double r = 0.5 * ball.radius * (1.0 + g.nodes[i]);
      const double wr = 0.5 * ball.radius * g.weights[i] * std::pow(r, n - 1);
      for (std::size_t j = 0; j < dirs.size(); ++j) {
        nodes.push_back(ball.center + r * dirs.nodes[j]);
        weights.push_back(wr * dirs.weights[j]);
      }
    }
  }
  for (const Vec3& x : nodes) {
    if (!field.contains(x)) throw InputError("ht_volume: region leaves the chart at " + describe_point(x));
  }
  std::vector<double> dens(nodes.size());
  parallel_for(nodes.size(), default_jobs(),
               [&](std::size_t i) { dens[i] = weights[i] * ht_volume_density(field, nodes[i]); });
  return compensated_sum(dens);
}

double k_area_density(const MetricField& field, const Vec3& x, std::span<const Vec3> a,
                      int grid_level) {
  const int k = static_cast<int>(a.size());
  if (k < 1 || k > field.dim()) throw InputError("k_area_density: need 1 <= k <= n");
  if (!field.contains(x)) throw InputError("k_area_density: point outside the base");
  const MinkowskiNorm norm = field.norm_at(x);
  std::vector<Vec3> coords;
  for (const Vec3& v : a) coords.push_back(field.to_frame(x, v));
  if (k == 1) return 0.5 * (norm(coords[0]) + norm(-coords[0]));
  bool orthonormal = true;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (std::abs(coords[i].dot(coords[j]) - (i == j ? 1.0 : 0.0)) > 1e-12) orthonormal = false;
    }
  }
  if (orthonormal) {
    return projection_area_k(codisc(norm, grid_level), coords) / unit_ball_volume(k);
  }
  // Image of the co-disc under xi -> (xi(a_1), ..., xi(a_k)); its support
  // function is c -> F(sum c_i a_i).
  auto shadow = ConvexBody::from_support(
      k,
      [norm, coords, k](const Vec3& c) {
        Vec3 w = Vec3::Zero();
        for (int i = 0; i < k; ++i) w += c[i] * coords[static_cast<std::size_t>(i)];
        return norm(w);
      },
      "k-shadow", grid_level);
  return volume(shadow) / unit_ball_volume(k);
}

Vec3 ParametrizedCurve::tangent(double t) const {
  if (velocity) return velocity(t);
  const double h = 1e-5 * std::max(1.0, std::abs(t1 - t0));
  return (-point(t + 2 * h) + 8 * point(t + h) - 8 * point(t - h) + point(t - 2 * h)) / (12 * h);
}

double hypersurface_area(const MetricField& field, const ParametrizedCurve& curve, double tol) {
  if (field.dim() != 2) throw InputError("hypersurface_area: curves need a 2-dimensional base");
  auto integrand = [&](double t) {
    const Vec3 x = curve.point(t);
    const Vec3 v = curve.tangent(t);
    if (!v.allFinite()) throw InputError("hypersurface_area: non-finite speed");
    return field(field.on_sphere() ? Vec3(x.normalized()) : x, v);
  };
  return adaptive_integrate(integrand, curve.t0, curve.t1, tol);
}

double hypersurface_area(const MetricField& field, const ParametrizedSurface& surface) {
  if (field.on_sphere() || field.dim() != 3) {
    throw InputError("hypersurface_area: surfaces need a 3-dimensional chart");
  }
  const GaussRule& g = gauss_legendre(surface.order);
  const double hs = 0.5 * (surface.s1 - surface.s0);
  const double ht = 0.5 * (surface.t1 - surface.t0);
  const double ds = 1e-4 * std::max(1e-3, std::abs(surface.s1 - surface.s0));
  const double dt = 1e-4 * std::max(1e-3, std::abs(surface.t1 - surface.t0));
  const std::size_t m = g.nodes.size();
  std::vector<double> terms(m * m);
  parallel_for(m * m, default_jobs(), [&](std::size_t idx) {
    const std::size_t i = idx / m, j = idx % m;
    const double s = surface.s0 + hs * (1.0 + g.nodes[i]);
    const double t = surface.t0 + ht * (1.0 + g.nodes[j]);
    const Vec3 a1 = (surface.point(s + ds, t) - surface.point(s - ds, t)) / (2 * ds);
    const Vec3 a2 = (surface.point(s, t + dt) - surface.point(s, t - dt)) / (2 * dt);
    const Vec3 frame[2] = {a1, a2};
    terms[idx] = hs * ht * g.weights[i] * g.weights[j] *
                 k_area_density(field, surface.point(s, t), frame);
  });
  return compensated_sum(terms);
}

}  // namespace finsler
