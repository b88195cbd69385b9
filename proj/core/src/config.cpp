#include "finsler/config.hpp"

#include <fstream>
#include <sstream>

#include "finsler/error.hpp"
#include "finsler/rigidity.hpp"

namespace finsler {

namespace {

using json = nlohmann::json;

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw InputError("config: " + where + ": " + what);
}

const json& member(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) bad(where, std::string("missing \"") + key + "\"");
  return j.at(key);
}

double number(const json& j, const char* key, const std::string& where, double fallback,
              bool required = false) {
  if (!j.contains(key)) {
    if (required) bad(where, std::string("missing \"") + key + "\"");
    return fallback;
  }
  const json& v = j.at(key);
  if (!v.is_number()) bad(where, std::string("\"") + key + "\" must be a number");
  return v.get<double>();
}

int integer(const json& j, const char* key, const std::string& where, int fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer()) bad(where, std::string("\"") + key + "\" must be an integer");
  return v.get<int>();
}

bool boolean(const json& j, const char* key, const std::string& where, bool fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_boolean()) bad(where, std::string("\"") + key + "\" must be a boolean");
  return v.get<bool>();
}

Vec3 vec(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() < 2 || v.size() > 3) bad(where, "expected an array of 2 or 3 numbers");
  Vec3 out = Vec3::Zero();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) bad(where, "expected numbers");
    out[static_cast<int>(i)] = v[i].get<double>();
  }
  return out;
}

Vec3 vec_member(const json& j, const char* key, const std::string& where, const Vec3& fallback,
                bool required = false) {
  if (!j.contains(key)) {
    if (required) bad(where, std::string("missing \"") + key + "\"");
    return fallback;
  }
  return vec(j.at(key), where + "." + key);
}

std::string tag(const json& j, const char* key, const std::string& where) {
  const json& t = member(j, key, where);
  if (!t.is_string()) bad(where, std::string("\"") + key + "\" must be a string");
  return t.get<std::string>();
}

int dimension(const json& j, const std::string& where, int fallback) {
  const int d = integer(j, "dim", where, fallback);
  if (d != 2 && d != 3) bad(where, "dim must be 2 or 3");
  return d;
}

}  // namespace

json load_json(const std::string& path_or_text) {
  const auto first = path_or_text.find_first_not_of(" \t\r\n");
  try {
    if (first != std::string::npos && (path_or_text[first] == '{' || path_or_text[first] == '[')) {
      return json::parse(path_or_text);
    }
    std::ifstream in(path_or_text);
    if (!in) throw InputError("config: cannot open " + path_or_text);
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError("config: " + path_or_text + ": " + e.what());
  }
}

CroftonDensity density_from_json(const json& j) {
  const std::string where = "density";
  const std::string type = tag(j, "type", where);
  if (type == "constant") return CroftonDensity::constant(number(j, "value", where, 0.25));
  if (type == "poly") {
    const json& c = member(j, "coeffs", where);
    if (!c.is_array() || c.empty()) bad(where, "\"coeffs\" must be a non-empty array");
    std::vector<std::array<double, 4>> terms;
    for (const json& t : c) {
      if (!t.is_array() || t.size() != 4) bad(where, "each term is [c, i, j, k]");
      std::array<double, 4> term{};
      for (int k = 0; k < 4; ++k) {
        if (!t[k].is_number()) bad(where, "each term is [c, i, j, k]");
        term[k] = t[k].get<double>();
      }
      for (int k = 1; k < 4; ++k) {
        if (term[k] < 0 || term[k] != std::floor(term[k])) bad(where, "exponents must be natural numbers");
      }
      terms.push_back(term);
    }
    return CroftonDensity::poly(terms);
  }
  if (type == "bump") {
    return perturbed_round_density(vec_member(j, "center", where, Vec3::UnitZ()),
                                   number(j, "amplitude", where, 0.5),
                                   number(j, "width", where, 0.2));
  }
  if (type == "sum") {
    const json& t = member(j, "terms", where);
    if (!t.is_array() || t.empty()) bad(where, "\"terms\" must be a non-empty array");
    CroftonDensity acc = density_from_json(t[0]);
    for (std::size_t i = 1; i < t.size(); ++i) acc = CroftonDensity::sum(acc, density_from_json(t[i]));
    return acc;
  }
  if (type == "scaled") {
    return CroftonDensity::scaled(number(j, "factor", where, 1.0, true),
                                  density_from_json(member(j, "density", where)));
  }
  bad(where, "unknown type '" + type + "'");
}

OneFormField one_form_from_json(const json& j, bool default_on_sphere) {
  const std::string where = "one_form";
  const std::string type = tag(j, "type", where);
  const bool sphere = boolean(j, "sphere", where, default_on_sphere);
  if (type == "exact_linear") {
    return OneFormField::exact_linear(sphere, vec_member(j, "g", where, Vec3::Zero(), true));
  }
  if (type == "rotation") {
    return OneFormField::rotation(vec_member(j, "axis", where, Vec3::UnitZ()),
                                  number(j, "scale", where, 1.0));
  }
  if (type == "constant") return OneFormField::constant(vec_member(j, "c", where, Vec3::Zero(), true));
  if (type == "zero") return OneFormField::zero(sphere);
  bad(where, "unknown type '" + type + "'");
}

ConvexDomain domain_from_json(const json& j) {
  const std::string where = "domain";
  const std::string type = tag(j, "type", where);
  if (type == "ball") return ball_domain();
  if (type == "superellipse") return superellipse_domain(number(j, "exponent", where, 4.0));
  bad(where, "unknown type '" + type + "'");
}

MetricField field_from_json(const json& j) {
  const std::string where = "field";
  const std::string family = tag(j, "family", where);
  if (family == "round") return round_metric(number(j, "radius", where, 1.0));
  if (family == "busemann") return busemann_metric(density_from_json(member(j, "density", where)));
  if (family == "euclidean") {
    return euclidean_field(dimension(j, where, 2), number(j, "half_width", where, 10.0));
  }
  if (family == "funk_ball") return funk_ball(dimension(j, where, 2));
  if (family == "hilbert_ball") return hilbert_ball(dimension(j, where, 2));
  if (family == "funk" || family == "hilbert") {
    const ConvexDomain d = domain_from_json(member(j, "domain", where));
    const int dim = dimension(j, where, 2);
    return family == "funk" ? funk_field(d, dim) : hilbert_field(d, dim);
  }
  if (family == "randers_sphere") return randers_sphere(one_form_from_json(member(j, "one_form", where), true));
  if (family == "randers_chart") {
    const int dim = dimension(j, where, 2);
    Eigen::Matrix3d g = Eigen::Matrix3d::Identity();
    if (j.contains("matrix")) {
      const json& m = j.at("matrix");
      if (!m.is_array() || static_cast<int>(m.size()) != dim) bad(where, "matrix must be dim x dim");
      for (int r = 0; r < dim; ++r) {
        const Vec3 row = vec(m[r], where + ".matrix");
        for (int c = 0; c < dim; ++c) g(r, c) = row[c];
      }
    }
    return randers_chart(dim, g, one_form_from_json(member(j, "one_form", where), false),
                         number(j, "half_width", where, 10.0));
  }
  if (family == "plus_one_form") {
    const MetricField base = field_from_json(member(j, "base", where));
    return add_one_form(base, one_form_from_json(member(j, "one_form", where), base.on_sphere()));
  }
  if (family == "reversed") return reverse_field(field_from_json(member(j, "base", where)));
  if (family == "symmetrized") {
    return central_symmetrization_field(field_from_json(member(j, "base", where)));
  }
  if (family == "areal_symmetrization") {
    return areal_symmetrization_field(field_from_json(member(j, "base", where)));
  }
  if (family == "scaled") {
    return scale_field(number(j, "factor", where, 1.0, true), field_from_json(member(j, "base", where)));
  }
  if (family == "average") {
    return average_field(field_from_json(member(j, "first", where)),
                         field_from_json(member(j, "second", where)));
  }
  bad(where, "unknown family '" + family + "'");
}

ConvexBody body_from_json(const json& j) {
  const std::string where = "body";
  const std::string type = tag(j, "type", where);
  ConvexBody body;
  if (type == "vertices") {
    const int dim = dimension(j, where, 3);
    const json& v = member(j, "vertices", where);
    if (!v.is_array() || static_cast<int>(v.size()) <= dim) bad(where, "too few vertices");
    std::vector<Vec3> pts;
    for (const json& p : v) pts.push_back(vec(p, where + ".vertices"));
    body = ConvexBody::from_vertices(dim, pts);
  } else if (type == "ball") {
    body = ConvexBody::ball(dimension(j, where, 3), number(j, "radius", where, 1.0),
                            vec_member(j, "center", where, Vec3::Zero()));
  } else if (type == "ellipsoid") {
    body = ConvexBody::ellipsoid(dimension(j, where, 3),
                                 vec_member(j, "semi_axes", where, Vec3::Ones(), true));
  } else if (type == "box") {
    body = ConvexBody::box(dimension(j, where, 3),
                           vec_member(j, "half_widths", where, Vec3::Ones(), true));
  } else if (type == "support_samples") {
    const int dim = dimension(j, where, 3);
    const json& v = member(j, "values", where);
    if (!v.is_array()) bad(where, "\"values\" must be an array");
    std::vector<double> h;
    for (const json& x : v) {
      if (!x.is_number()) bad(where, "\"values\" must be numbers");
      h.push_back(x.get<double>());
    }
    body = ConvexBody::from_samples(dim, integer(j, "level", where, 3), h);
  } else if (type == "reuleaux") {
    body = rotated_reuleaux(number(j, "width", where, 1.0), integer(j, "level", where, 4));
  } else if (type == "tetrahedron") {
    body = regular_tetrahedron();
  } else if (type == "constant_brightness") {
    body = constant_brightness_body(number(j, "eps", where, 0.9), integer(j, "level", where, 3));
  } else {
    bad(where, "unknown type '" + type + "'");
  }
  if (j.contains("scale")) {
    const double c = number(j, "scale", where, 1.0);
    if (!(c > 0.0)) bad(where, "scale must be positive");
    body = body.scaled(c);
  }
  if (j.contains("translate")) body = body.translated(vec_member(j, "translate", where, Vec3::Zero()));
  return body;
}

Region region_from_json(const json& j) {
  const std::string where = "region";
  const std::string type = tag(j, "type", where);
  if (type == "sphere") return WholeSphere{integer(j, "level", where, 3)};
  if (type == "box") {
    return BoxRegion{vec_member(j, "lo", where, Vec3::Zero(), true),
                     vec_member(j, "hi", where, Vec3::Zero(), true), integer(j, "order", where, 16)};
  }
  if (type == "ball") {
    return BallRegion{vec_member(j, "center", where, Vec3::Zero()), number(j, "radius", where, 1.0),
                      integer(j, "order", where, 16)};
  }
  bad(where, "unknown type '" + type + "'");
}

json body_to_json(const ConvexBody& body) {
  json verts = json::array();
  for (const Vec3& v : body.polytope().vertices()) {
    if (body.dim() == 2) {
      verts.push_back({v.x(), v.y()});
    } else {
      verts.push_back({v.x(), v.y(), v.z()});
    }
  }
  return {{"type", "vertices"}, {"dim", body.dim()}, {"family", body.family()}, {"vertices", verts}};
}

const json& field_config(const json& j) {
  if (j.is_object() && j.contains("config") && !j.contains("family")) return j.at("config");
  return j;
}

}  // namespace finsler
