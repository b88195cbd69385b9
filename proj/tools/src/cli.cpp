#include "finsler_cli/cli.hpp"

#include <chrono>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "finsler/check_report.hpp"
#include "finsler/config.hpp"
#include "finsler/crofton.hpp"
#include "finsler/error.hpp"
#include "finsler/geodesic.hpp"
#include "finsler/rigidity.hpp"

namespace finsler::cli {

namespace {

using json = nlohmann::json;

struct Globals {
  int grid_level = 3;
  std::optional<double> tol;
  std::uint64_t seed = 1;
  int jobs = 1;
  std::string format = "json";
};

class Session {
 public:
  Session(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  void diag(const std::string& level, const std::string& event, json extra = json::object()) {
    extra["level"] = level;
    extra["event"] = event;
    err_ << extra.dump() << '\n';
  }

  void write_text(const std::string& text, const std::string& path) {
    out_ << text;
    if (!text.empty() && text.back() != '\n') out_ << '\n';
    if (path.empty()) return;
    std::ofstream f(path);
    if (!f) throw InputError("cannot write " + path);
    f << text;
    if (!text.empty() && text.back() != '\n') f << '\n';
    diag("info", "wrote", {{"path", path}});
  }

  int emit(const CheckReport& rep, const std::string& path, const Globals& g) {
    write_text(g.format == "csv" ? rep.to_csv() : rep.to_json().dump(2), path);
    for (const auto& [name, r] : rep.residuals) {
      diag("info", "residual",
           {{"check", rep.check}, {"name", name}, {"value", r}, {"tolerance", rep.tolerances.at(name)}});
    }
    diag("info", "verdict", {{"check", rep.check}, {"verdict", to_string(rep.verdict)}});
    return rep.pass() ? kPass : kCheckFailed;
  }

  std::ostream& out() { return out_; }

 private:
  std::ostream& out_;
  std::ostream& err_;
};

MetricField load_field(const std::string& path) { return field_from_json(field_config(load_json(path))); }

Vec3 to_vec(const std::vector<double>& v, const char* name) {
  if (v.size() < 2 || v.size() > 3) throw InputError(std::string(name) + " needs 2 or 3 components");
  Vec3 out = Vec3::Zero();
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<int>(i)] = v[i];
  return out;
}

CheckReport volume_report(const MetricField& field, const std::optional<json>& region_cfg,
                          const Globals& g) {
  CheckReport rep;
  rep.check = "volume";
  rep.inputs = {{"field", field.description()}, {"grid_level", g.grid_level}};
  Region region = WholeSphere{g.grid_level};
  if (region_cfg) {
    region = region_from_json(*region_cfg);
    rep.inputs["region"] = *region_cfg;
  } else if (!field.on_sphere()) {
    throw InputError("volume: chart fields need --region");
  }
  const double vol = ht_volume(field, region);
  rep.values["volume"] = vol;
  if (field.is_busemann() && std::holds_alternative<WholeSphere>(region)) {
    // Record the prediction from the prime geodesic length alongside.
    const double ell = prime_geodesic_length(field);
    rep.values["length"] = ell;
    rep.values["predicted_volume"] = ell * ell / kPi;
    rep.lhs = vol;
    rep.rhs = ell * ell / kPi;
    rep.add("volume_identity", std::abs(vol - *rep.rhs) / vol, g.tol.value_or(1e-2));
    rep.finalize();
  } else {
    rep.verdict = Verdict::Pass;
  }
  return rep;
}

std::vector<std::pair<Vec3, Vec3>> reversibility_samples(const MetricField& field, int count,
                                                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
  std::vector<std::pair<Vec3, Vec3>> out;
  for (const Vec3& x : sample_base_points(field, count)) {
    const double a = angle(rng);
    out.emplace_back(x, field.from_frame(x, Vec3(std::cos(a), std::sin(a), 0.0)));
  }
  return out;
}

std::string trajectory_csv(const GeodesicTrajectory& traj) {
  std::ostringstream s;
  s.precision(17);
  s << "t,x,y,z,vx,vy,vz,xi_x,xi_y,xi_z,energy\n";
  for (const auto& st : traj.states) {
    s << st.t << ',' << st.x.x() << ',' << st.x.y() << ',' << st.x.z() << ',' << st.v.x() << ','
      << st.v.y() << ',' << st.v.z() << ',' << st.xi.x() << ',' << st.xi.y() << ',' << st.xi.z()
      << ',' << st.energy << '\n';
  }
  return s.str();
}

std::string brightness_table(const ConvexBody& body, int level, const std::string& format) {
  const DirectionGrid& grid = sphere_grid(body.dim(), level);
  std::vector<double> b(grid.size());
  parallel_for(grid.size(), default_jobs(), [&](std::size_t i) { b[i] = brightness(body, grid.nodes[i]); });
  if (format == "csv") {
    std::ostringstream s;
    s.precision(17);
    s << "ux,uy,uz,brightness\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Vec3& u = grid.nodes[i];
      s << u.x() << ',' << u.y() << ',' << u.z() << ',' << b[i] << '\n';
    }
    return s.str();
  }
  json dirs = json::array();
  for (const Vec3& u : grid.nodes) dirs.push_back({u.x(), u.y(), u.z()});
  return json{{"family", body.family()}, {"grid_level", level}, {"directions", dirs}, {"brightness", b}}
      .dump(2);
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  Session session(out, err);
  Globals g;
  CLI::App app{"Finsler geometry workbench"};
  app.set_version_flag("--version", "finsler 0.1.0");
  app.require_subcommand(1);
  app.add_option("--grid-level", g.grid_level, "Sphere grid level for volumes")->check(CLI::Range(0, 6));
  app.add_option("--tol", g.tol, "Override the primary tolerance of a check");
  app.add_option("--seed", g.seed, "Seed for sampled inputs");
  app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::Range(1, 256));
  app.add_option("--format", g.format, "Report format")->check(CLI::IsMember({"json", "csv"}));

  std::function<int()> action;
  std::string out_path;

  // build
  std::string config_path;
  auto* build = app.add_subcommand("build", "Validate a field config and cache it");
  build->add_option("--config", config_path, "Field config JSON")->required();
  build->add_option("--out", out_path, "Output file");
  build->callback([&] {
    action = [&] {
      const json cfg = field_config(load_json(config_path));
      const MetricField f = field_from_json(cfg);
      session.write_text(json{{"config", cfg}, {"description", f.description()}}.dump(2), out_path);
      return int(kPass);
    };
  });

  // volume
  std::string field_path, region_text;
  auto* vol = app.add_subcommand("volume", "Holmes-Thompson volume of a field");
  vol->add_option("--field", field_path, "Field JSON")->required();
  vol->add_option("--region", region_text, "Region JSON file or inline JSON");
  vol->add_option("--out", out_path, "Report file");
  vol->callback([&] {
    action = [&] {
      std::optional<json> region;
      if (!region_text.empty()) region = load_json(region_text);
      return session.emit(volume_report(load_field(field_path), region, g), out_path, g);
    };
  });

  // geodesic
  std::vector<double> x0, v0;
  double T = 1.0;
  int samples = 256;
  auto* geo = app.add_subcommand("geodesic", "Trace a unit-speed geodesic");
  geo->add_option("--field", field_path, "Field JSON")->required();
  geo->add_option("--x0", x0, "Initial point x,y[,z]")->required()->delimiter(',');
  geo->add_option("--v0", v0, "Initial velocity x,y[,z]")->required()->delimiter(',');
  geo->add_option("--T", T, "Arclength; negative traces backward");
  geo->add_option("--samples", samples, "Output intervals")->check(CLI::Range(1, 1000000));
  geo->add_option("--out", out_path, "Trajectory CSV");
  geo->callback([&] {
    action = [&] {
      TraceOptions opt;
      opt.samples = samples;
      const auto traj =
          geodesic_trace(load_field(field_path), to_vec(x0, "--x0"), to_vec(v0, "--v0"), T, opt);
      session.write_text(trajectory_csv(traj), out_path);
      session.diag("info", "geodesic",
                   {{"steps", traj.steps},
                    {"recenterings", traj.recenterings},
                    {"max_energy_drift", traj.max_energy_drift},
                    {"max_speed_error", traj.max_speed_error},
                    {"hit_boundary", traj.hit_boundary}});
      return int(kPass);
    };
  });

  // check
  auto* check = app.add_subcommand("check", "Run a rigidity or integral-geometry check");
  check->require_subcommand(1);
  std::vector<std::string> field_paths;
  std::string curve = "latitude:60";
  std::string body_path, gauge_path;
  double rev_T = 1.0;
  int rev_samples = 8;

  auto add_field = [&](CLI::App* c) {
    c->add_option("--field", field_path, "Field JSON")->required();
    c->add_option("--out", out_path, "Report file");
  };
  auto* zoll = check->add_subcommand("zoll", "Zoll volume identity");
  add_field(zoll);
  zoll->callback([&] {
    action = [&] {
      return session.emit(zoll_volume_check(load_field(field_path), g.grid_level, g.tol.value_or(1e-2)),
                          out_path, g);
    };
  });
  auto* santalo = check->add_subcommand("santalo", "Santalo formula");
  add_field(santalo);
  santalo->callback([&] {
    action = [&] {
      return session.emit(santalo_check(load_field(field_path), g.grid_level, g.tol.value_or(1e-2)),
                          out_path, g);
    };
  });
  auto* crofton = check->add_subcommand("crofton", "Crofton formula for a curve");
  add_field(crofton);
  crofton->add_option("--curve", curve, "equator | latitude:DEG | great_circle:x,y,z");
  crofton->callback([&] {
    action = [&] {
      return session.emit(crofton_area_check(load_field(field_path), SphereCurve::named(curve).curve,
                                             g.tol.value_or(1e-2)),
                          out_path, g);
    };
  });
  auto* rev = check->add_subcommand("reversibility", "Geodesic reversibility");
  add_field(rev);
  rev->add_option("--T", rev_T, "Trace length");
  rev->add_option("--samples", rev_samples, "Initial conditions")->check(CLI::Range(1, 10000));
  rev->callback([&] {
    action = [&] {
      const MetricField f = load_field(field_path);
      return session.emit(
          reversibility_check(f, reversibility_samples(f, rev_samples, g.seed), rev_T, g.tol.value_or(1e-5)),
          out_path, g);
    };
  });
  auto* rpc = check->add_subcommand("rev-plus-closed", "Reversible plus closed 1-form split");
  add_field(rpc);
  rpc->callback([&] {
    action = [&] {
      ReversiblePlusClosedOptions opt;
      if (g.tol) opt.linearity_tol = *g.tol;
      return session.emit(detect_reversible_plus_closed(load_field(field_path), opt).report, out_path, g);
    };
  });
  auto* chak = check->add_subcommand("chakerian", "Constant width and brightness test");
  chak->add_option("--body", body_path, "Body JSON")->required();
  chak->add_option("--gauge", gauge_path, "Symmetric gauge body JSON")->required();
  chak->add_option("--out", out_path, "Report file");
  chak->callback([&] {
    action = [&] {
      return session.emit(chakerian_check(body_from_json(load_json(body_path)),
                                          body_from_json(load_json(gauge_path)), g.tol.value_or(1e-5)),
                          out_path, g);
    };
  });
  auto* dens = check->add_subcommand("density-rigidity", "Equal HT densities imply exact difference");
  dens->add_option("--field", field_paths, "Two field JSONs")->required()->expected(2);
  dens->add_option("--out", out_path, "Report file");
  dens->callback([&] {
    action = [&] {
      DensityRigidityOptions opt;
      opt.volume_level = g.grid_level;
      if (g.tol) opt.density_tol = *g.tol;
      return session.emit(
          ht_density_rigidity_check(load_field(field_paths.at(0)), load_field(field_paths.at(1)), opt),
          out_path, g);
    };
  });

  // body
  auto* body = app.add_subcommand("body", "Convex body operations");
  body->require_subcommand(1);
  std::string in_path;
  auto add_body = [&](const char* name, const char* help, std::function<std::string(const ConvexBody&)> op) {
    auto* c = body->add_subcommand(name, help);
    c->add_option("--in", in_path, "Body JSON")->required();
    c->add_option("--out", out_path, "Output file");
    c->callback([&, op] {
      action = [&, op] {
        session.write_text(op(body_from_json(load_json(in_path))), out_path);
        return int(kPass);
      };
    });
  };
  add_body("blaschke", "Blaschke body (same brightness, symmetric)", [&](const ConvexBody& k) {
    const BlaschkeResult r = blaschke_body(k);
    session.diag("info", "blaschke", {{"iterations", r.iterations}, {"max_rel_error", r.max_rel_error}});
    return body_to_json(r.body).dump(2);
  });
  add_body("polar", "Polar body", [](const ConvexBody& k) { return body_to_json(polar(k)).dump(2); });
  add_body("symmetral", "Central symmetral (K - K) / 2",
           [](const ConvexBody& k) { return body_to_json(central_symmetral(k)).dump(2); });
  add_body("brightness", "Brightness function on a direction grid", [&](const ConvexBody& k) {
    return brightness_table(k, std::min(g.grid_level, 3), g.format);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kPass;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kPass;
  } catch (const CLI::CallForVersion&) {
    out << "finsler 0.1.0\n";
    return kPass;
  } catch (const CLI::ParseError& e) {
    session.diag("error", "usage", {{"message", e.what()}});
    return kUsage;
  }

  set_default_jobs(g.jobs);
  const auto start = std::chrono::steady_clock::now();
  try {
    const int code = action ? action() : int(kUsage);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    session.diag("info", "done", {{"exit_code", code}, {"seconds", secs}});
    return code;
  } catch (const ConvergenceError& e) {
    session.diag("error", "non_convergence",
                 {{"message", e.what()}, {"residual_history", e.residual_history()}});
    return kNoConvergence;
  } catch (const Error& e) {
    session.diag("error", "input", {{"message", e.what()}});
    return kUsage;
  } catch (const std::exception& e) {
    session.diag("error", "internal", {{"message", e.what()}});
    return kUsage;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> copy = args;
  std::vector<char*> argv;
  argv.reserve(copy.size() + 1);
  for (auto& a : copy) argv.push_back(a.data());
  argv.push_back(nullptr);
  return run(static_cast<int>(copy.size()), argv.data(), out, err);
}

}  // namespace finsler::cli
