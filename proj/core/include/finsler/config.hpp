#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "finsler/convex_body.hpp"
#include "finsler/crofton.hpp"
#include "finsler/metric_field.hpp"

namespace finsler {

/// Reads a JSON document from a file, or parses `text` directly when it
/// starts with '{' or '['. Throws InputError on failure.
nlohmann::json load_json(const std::string& path_or_text);

/// Config schemas. Every object carries a "family" (fields) or "type"
/// (everything else) tag:
///
///   field:   round{radius} | busemann{density} | euclidean{dim, half_width}
///            | funk_ball{dim} | hilbert_ball{dim} | funk{domain, dim}
///            | hilbert{domain, dim} | randers_sphere{one_form}
///            | randers_chart{dim, matrix, one_form, half_width}
///            | plus_one_form{base, one_form} | reversed{base}
///            | symmetrized{base} | areal_symmetrization{base}
///            | scaled{factor, base} | average{first, second}
///   density: constant{value} | poly{coeffs: [[c, i, j, k], ...]}
///            | bump{center, amplitude, width} | sum{terms} | scaled{factor, density}
///   1-form:  exact_linear{g, sphere} | rotation{axis, scale} | constant{c} | zero{sphere}
///   domain:  ball | superellipse{exponent}
///   body:    vertices{dim, vertices} | ball{dim, radius, center}
///            | ellipsoid{dim, semi_axes} | box{dim, half_widths}
///            | support_samples{dim, level, values} | reuleaux{width, level}
///            | tetrahedron | constant_brightness{eps, level}
///            with optional "scale" and "translate" applied in that order
///   region:  sphere{level} | box{lo, hi, order} | ball{center, radius, order}
CroftonDensity density_from_json(const nlohmann::json& j);
OneFormField one_form_from_json(const nlohmann::json& j, bool default_on_sphere);
ConvexDomain domain_from_json(const nlohmann::json& j);
MetricField field_from_json(const nlohmann::json& j);
ConvexBody body_from_json(const nlohmann::json& j);
Region region_from_json(const nlohmann::json& j);

/// Vertex description of the body's polytope, readable by body_from_json.
nlohmann::json body_to_json(const ConvexBody& body);

/// Accepts either a bare field config or the output of `build`
/// ({"config": ..., "description": ...}) and returns the config.
const nlohmann::json& field_config(const nlohmann::json& j);

}  // namespace finsler
