#include "finsler/crofton.hpp"

#include <cmath>
#include <complex>
#include <sstream>

#include <Eigen/Geometry>

#include "finsler/error.hpp"

namespace finsler {

CroftonDensity::CroftonDensity(Fn m, nlohmann::json description)
    : m_(std::move(m)), description_(std::move(description)) {
  if (!m_) throw InputError("CroftonDensity: null evaluator");
}

CroftonDensity CroftonDensity::constant(double value) {
  return CroftonDensity([value](const Vec3&) { return value; },
                        {{"type", "constant"}, {"value", value}});
}

CroftonDensity CroftonDensity::poly(const std::vector<std::array<double, 4>>& terms) {
  nlohmann::json coeffs = nlohmann::json::array();
  for (const auto& t : terms) {
    for (int e = 1; e < 4; ++e) {
      if (t[e] < 0.0 || t[e] != std::floor(t[e])) {
        throw InputError("CroftonDensity::poly: exponents must be non-negative integers");
      }
    }
    coeffs.push_back({t[0], t[1], t[2], t[3]});
  }
  return CroftonDensity(
      [terms](const Vec3& p) {
        double s = 0.0;
        for (const auto& t : terms) {
          s += t[0] * std::pow(p.x(), static_cast<int>(t[1])) *
               std::pow(p.y(), static_cast<int>(t[2])) * std::pow(p.z(), static_cast<int>(t[3]));
        }
        return s;
      },
      {{"type", "poly"}, {"coeffs", coeffs}});
}

CroftonDensity CroftonDensity::sum(const CroftonDensity& a, const CroftonDensity& b) {
  auto fa = a.m_;
  auto fb = b.m_;
  return CroftonDensity([fa, fb](const Vec3& p) { return fa(p) + fb(p); },
                        {{"type", "sum"}, {"terms", {a.description_, b.description_}}});
}

CroftonDensity CroftonDensity::scaled(double c, const CroftonDensity& d) {
  auto f = d.m_;
  return CroftonDensity([f, c](const Vec3& p) { return c * f(p); },
                        {{"type", "scaled"}, {"factor", c}, {"density", d.description_}});
}

double CroftonDensity::evenness_defect(int level) const {
  const DirectionGrid& g = sphere_grid(3, level);
  double worst = 0.0;
  for (const Vec3& p : g.nodes) worst = std::max(worst, std::abs(m_(p) - m_(-p)));
  return worst;
}

double CroftonDensity::min_value(int level) const {
  const DirectionGrid& g = sphere_grid(3, level);
  double lo = std::numeric_limits<double>::infinity();
  for (const Vec3& p : g.nodes) lo = std::min(lo, m_(p));
  return lo;
}

double CroftonDensity::total_mass(int level) const {
  return integrate_sphere(sphere_grid(3, level), m_);
}

CroftonDensity perturbed_round_density(const Vec3& q, double amplitude, double width) {
  if (!(amplitude > -1.0)) throw InputError("perturbed_round_density: amplitude must exceed -1");
  if (!(width > 0.0)) throw InputError("perturbed_round_density: width must be positive");
  if (q.norm() == 0.0) throw InputError("perturbed_round_density: zero bump center");
  const Vec3 qq = q.normalized();
  const double s2 = width * width;
  return CroftonDensity(
      [qq, amplitude, s2](const Vec3& p) {
        const double c = p.dot(qq);
        return 0.25 * (1.0 + amplitude * std::exp(-(1.0 - c * c) / s2));
      },
      {{"type", "bump"},
       {"center", {qq.x(), qq.y(), qq.z()}},
       {"amplitude", amplitude},
       {"width", width}});
}

namespace {

constexpr int kFiberOrder = 64;
constexpr int kFourierSamples = 256;

// Fiber at x in tangent-frame coordinates from the Fourier series of m on
// the circle of poles. With p(psi) = cos psi e1 + sin psi e2,
// F(phi) = int |cos(psi - phi)| m(psi) dpsi = 2 pi sum_k a_k c_k e^{i k phi},
// a_k the coefficients of |cos|.
MinkowskiNorm fourier_fiber(const CroftonDensity::Fn& m, const Vec3& x) {
  const auto [e1, e2] = tangent_frame(x);
  const int n = kFourierSamples;
  const int kmax = n / 2 - 2;
  std::vector<double> samples(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double psi = 2 * kPi * j / n;
    samples[static_cast<std::size_t>(j)] = m(std::cos(psi) * e1 + std::sin(psi) * e2);
  }
  // Only even modes survive the convolution with |cos|.
  auto coef = std::make_shared<std::vector<std::complex<double>>>();
  for (int k = 0; k <= kmax; k += 2) {
    std::complex<double> c = 0.0;
    for (int j = 0; j < n; ++j) {
      c += samples[static_cast<std::size_t>(j)] * std::polar(1.0, -2 * kPi * k * j / n);
    }
    c /= static_cast<double>(n);
    const double a = k == 0 ? 2.0 / kPi
                            : (2.0 / kPi) * (((k / 2) % 2 == 1) ? 1.0 : -1.0) / (k * k - 1.0);
    coef->push_back((k == 0 ? 2 * kPi : 4 * kPi) * a * c);
  }
  auto eval = [coef](double phi, double* deriv) {
    const std::complex<double> z = std::polar(1.0, 2 * phi);
    std::complex<double> zk = 1.0;
    double f = 0.0, df = 0.0;
    for (std::size_t i = 0; i < coef->size(); ++i) {
      const std::complex<double> t = (*coef)[i] * zk;
      f += t.real();
      df -= 2.0 * static_cast<double>(i) * t.imag();
      zk *= z;
    }
    if (deriv) *deriv = df;
    return f;
  };
  return MinkowskiNorm(
      2,
      [eval](const Vec3& u) {
        const double r = std::hypot(u.x(), u.y());
        if (r == 0.0) return 0.0;
        return r * eval(std::atan2(u.y(), u.x()), nullptr);
      },
      "busemann",
      [eval](const Vec3& u) -> Vec3 {
        const double phi = std::atan2(u.y(), u.x());
        double d = 0.0;
        const double f = eval(phi, &d);
        const Vec3 radial(std::cos(phi), std::sin(phi), 0.0);
        const Vec3 angular(-std::sin(phi), std::cos(phi), 0.0);
        return f * radial + d * angular;
      });
}

}  // namespace

MetricField busemann_metric(const CroftonDensity& m) {
  if (m.evenness_defect(3) > 1e-12) throw InputError("busemann_metric: density is not even");
  if (!(m.min_value(3) > 0.0)) throw InputError("busemann_metric: negative density node");
  const GaussRule& rule = gauss_legendre(kFiberOrder);
  const auto fn = m.function();
  // Nodes of int_{-pi/2}^{pi/2} in theta; the integrand cos(theta)(m(p) + m(-p))
  // is smooth there, the kinks of |p . v| sit at the end points.
  std::vector<double> theta, weight;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    theta.push_back(0.5 * kPi * rule.nodes[k]);
    weight.push_back(0.5 * kPi * rule.weights[k]);
  }
  auto fiber = [fn, theta, weight](const Vec3& x, const Vec3& t) {
    const double speed = t.norm();
    if (speed == 0.0) return 0.0;
    const Vec3 th = t / speed;
    const Vec3 nh = x.normalized().cross(th);
    double s = 0.0;
    for (std::size_t k = 0; k < theta.size(); ++k) {
      const Vec3 p = std::cos(theta[k]) * th + std::sin(theta[k]) * nh;
      s += weight[k] * std::cos(theta[k]) * (fn(p) + fn(-p));
    }
    return speed * s;
  };
  MetricField::Options o;
  o.gradient = [fn, theta, weight](const Vec3& x, const Vec3& v) -> Vec3 {
    const Vec3 xn = x.normalized();
    const Vec3 t = v - v.dot(xn) * xn;
    const Vec3 th = t.normalized();
    const Vec3 nh = xn.cross(th);
    Vec3 g = Vec3::Zero();
    for (std::size_t k = 0; k < theta.size(); ++k) {
      const Vec3 p = std::cos(theta[k]) * th + std::sin(theta[k]) * nh;
      g += weight[k] * (fn(p) + fn(-p)) * p;
    }
    return g;
  };
  o.norm_factory = [fn](const Vec3& x) { return fourier_fiber(fn, x); };
  o.crofton_density = fn;
  o.reversible = true;
  o.description = {{"family", "busemann"}, {"density", m.description()}};
  return MetricField::sphere(fiber, "busemann", std::move(o));
}

SphereCurve SphereCurve::equator() { return latitude(0.0); }

SphereCurve SphereCurve::latitude(double degrees) {
  if (!(std::abs(degrees) < 90.0)) throw InputError("SphereCurve::latitude: need |latitude| < 90");
  const double phi = degrees * kPi / 180.0;
  const double c = std::cos(phi), s = std::sin(phi);
  SphereCurve out;
  out.curve.point = [c, s](double t) { return Vec3(c * std::cos(t), c * std::sin(t), s); };
  out.curve.velocity = [c](double t) { return Vec3(-c * std::sin(t), c * std::cos(t), 0.0); };
  out.curve.t0 = 0.0;
  out.curve.t1 = 2 * kPi;
  out.curve.closed = true;
  out.curve.name = degrees == 0.0 ? "equator" : "latitude:" + std::to_string(degrees);
  return out;
}

SphereCurve SphereCurve::great_circle(const Vec3& pole) {
  if (pole.norm() == 0.0) throw InputError("SphereCurve::great_circle: zero pole");
  const auto [e1, e2] = tangent_frame(pole.normalized());
  SphereCurve out;
  out.curve.point = [e1, e2](double t) -> Vec3 { return std::cos(t) * e1 + std::sin(t) * e2; };
  out.curve.velocity = [e1, e2](double t) -> Vec3 {
    return -std::sin(t) * e1 + std::cos(t) * e2;
  };
  out.curve.t0 = 0.0;
  out.curve.t1 = 2 * kPi;
  out.curve.closed = true;
  out.curve.name = "great_circle";
  return out;
}

SphereCurve SphereCurve::arc(const Vec3& a, const Vec3& b) {
  const Vec3 an = a.normalized();
  const Vec3 bn = b.normalized();
  const Vec3 w0 = bn - bn.dot(an) * an;
  if (w0.norm() < 1e-12) throw InputError("SphereCurve::arc: endpoints equal or antipodal");
  const Vec3 w = w0.normalized();
  const double angle = std::atan2(w0.norm(), an.dot(bn));
  SphereCurve out;
  out.curve.point = [an, w](double t) -> Vec3 { return std::cos(t) * an + std::sin(t) * w; };
  out.curve.velocity = [an, w](double t) -> Vec3 { return -std::sin(t) * an + std::cos(t) * w; };
  out.curve.t0 = 0.0;
  out.curve.t1 = angle;
  out.curve.name = "arc";
  return out;
}

SphereCurve SphereCurve::named(const std::string& name) {
  if (name == "equator") return equator();
  const auto colon = name.find(':');
  const std::string head = name.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : name.substr(colon + 1);
  try {
    if (head == "latitude" && !arg.empty()) return latitude(std::stod(arg));
    if (head == "great_circle" && !arg.empty()) {
      std::stringstream ss(arg);
      std::string item;
      std::vector<double> c;
      while (std::getline(ss, item, ',')) c.push_back(std::stod(item));
      if (c.size() == 3) return great_circle(Vec3(c[0], c[1], c[2]));
    }
  } catch (const std::logic_error&) {
  }
  throw InputError("unknown curve '" + name + "'");
}

Eigen::Matrix3d counting_rotation() {
  return Eigen::AngleAxisd(0.7137, Vec3(0.3, 0.5, 0.81).normalized()).toRotationMatrix();
}

CroftonLength crofton_length(const CroftonDensity& m, const ParametrizedCurve& curve,
                             int grid_level, int samples) {
  if (samples < 16) throw InputError("crofton_length: too few curve samples");
  const DirectionGrid& grid = sphere_grid(3, grid_level);
  const Eigen::Matrix3d rot = counting_rotation();
  const double dt = (curve.t1 - curve.t0) / samples;
  std::vector<Vec3> pts(static_cast<std::size_t>(samples) + 1);
  for (int j = 0; j <= samples; ++j) {
    pts[static_cast<std::size_t>(j)] = curve.point(curve.t0 + j * dt).normalized();
  }
  const std::size_t np = grid.size();
  std::vector<int> counts(np, 0);
  std::vector<double> min_slope(np, std::numeric_limits<double>::infinity());
  parallel_for(np, default_jobs(), [&](std::size_t i) {
    const Vec3 p = rot * grid.nodes[i];
    double prev = pts[0].dot(p);
    for (std::size_t j = 1; j < pts.size(); ++j) {
      const double cur = pts[j].dot(p);
      if ((prev >= 0.0) != (cur >= 0.0)) {
        ++counts[i];
        // Polish the root and look at the slope there.
        double a = curve.t0 + static_cast<double>(j - 1) * dt;
        double b = a + dt;
        double ga = prev;
        for (int it = 0; it < 40; ++it) {
          const double mid = 0.5 * (a + b);
          const double gm = curve.point(mid).dot(p);
          if ((gm >= 0.0) == (ga >= 0.0)) {
            a = mid;
            ga = gm;
          } else {
            b = mid;
          }
        }
        const double slope = std::abs(curve.tangent(0.5 * (a + b)).dot(p));
        min_slope[i] = std::min(min_slope[i], slope);
      }
      prev = cur;
    }
  });
  CroftonLength out;
  out.poles = np;
  CompensatedSum sum;
  for (std::size_t i = 0; i < np; ++i) {
    const Vec3 p = rot * grid.nodes[i];
    sum.add(grid.weights[i] * m(p) * counts[i]);
    out.crossings += static_cast<std::size_t>(counts[i]);
    if (min_slope[i] < 1e-10 && out.warnings.size() < 10) {
      std::ostringstream os;
      os << "suspected tangency with the great circle of pole (" << p.x() << ", " << p.y()
         << ", " << p.z() << ")";
      out.warnings.push_back(os.str());
    }
  }
  out.length = sum.value();
  return out;
}

}  // namespace finsler
