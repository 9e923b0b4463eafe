#include "fedbht/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <set>

#include "fedbht/io.hpp"
#include "fedbht/mesh_generation.hpp"

namespace fedbht {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string join(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

const json* find(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  const json* v = find(obj, key);
  if (!v) throw ConfigError(join(path, key), "missing");
  return *v;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(path, "not finite");
  return x;
}

double number_or(const json& obj, const char* key, double fallback, const std::string& path) {
  const json* v = find(obj, key);
  return v ? number(*v, join(path, key)) : fallback;
}

bool bool_or(const json& obj, const char* key, bool fallback, const std::string& path) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_boolean()) throw ConfigError(join(path, key), "expected true or false");
  return v->get<bool>();
}

std::string string_of(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path, "expected a string");
  return v.get<std::string>();
}

Index index_of(const json& v, const std::string& path, Index node_count) {
  if (!v.is_number_integer()) throw ConfigError(path, "expected a node index");
  const auto i = v.get<std::int64_t>();
  if (i < 0 || i >= node_count) throw ConfigError(path, "node index " + std::to_string(i) + " out of range");
  return static_cast<Index>(i);
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return fs::absolute(path.is_absolute() ? path : base / path).lexically_normal();
}

/// A number means a constant; otherwise an array of [temperature, value].
PropertyTable table(const json& v, const std::string& path) {
  if (v.is_number()) return PropertyTable(number(v, path));
  if (!v.is_array() || v.empty()) throw ConfigError(path, "expected a number or [[T, value], ...]");
  std::vector<PropertyTable::Breakpoint> points;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& row = v[i];
    if (!row.is_array() || row.size() != 2) throw ConfigError(join(path, i), "expected [T, value]");
    points.emplace_back(number(row[0], join(path, i) + "[0]"), number(row[1], join(path, i) + "[1]"));
  }
  try {
    return PropertyTable(std::move(points));
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
}

MaterialModel parse_material(const json& v, const std::string& path) {
  MaterialModel m;
  if (!v.is_object()) throw ConfigError(path, "expected an object");
  if (const json* d = find(v, "density")) m.density = table(*d, join(path, "density"));
  if (const json* c = find(v, "specific_heat")) m.specific_heat = table(*c, join(path, "specific_heat"));
  if (const json* k = find(v, "conductivity")) {
    const std::string kp = join(path, "conductivity");
    if (k->is_object()) {
      static constexpr std::array<const char*, 6> kNames{"xx", "yy", "zz", "xy", "xz", "yz"};
      AnisotropicConductivity aniso;
      for (std::size_t c = 0; c < 6; ++c) {
        const json* comp = find(*k, kNames[c]);
        if (!comp && c < 3) throw ConfigError(join(kp, kNames[c]), "missing");
        aniso.components[c] = comp ? table(*comp, join(kp, kNames[c])) : PropertyTable(0.0);
      }
      m.conductivity = aniso;
    } else {
      m.conductivity = IsotropicConductivity{table(*k, kp)};
    }
  }
  try {
    m.validate();
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
  return m;
}

Mat3 matrix3(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) throw ConfigError(path, "expected a 3x3 array");
  Mat3 a;
  for (std::size_t i = 0; i < 3; ++i) {
    if (!v[i].is_array() || v[i].size() != 3) throw ConfigError(join(path, i), "expected 3 numbers");
    for (std::size_t j = 0; j < 3; ++j) a(Index(i), Index(j)) = number(v[i][j], join(join(path, i), j));
  }
  return a;
}

Vec3 vector3(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) throw ConfigError(path, "expected 3 numbers");
  return {number(v[0], join(path, 0)), number(v[1], join(path, 1)), number(v[2], join(path, 2))};
}

}  // namespace

RunOptions Scenario::options() const {
  RunOptions o;
  o.variant = variant;
  o.reference_temperature = reference_temperature;
  o.probe_nodes = probes;
  return o;
}

Scenario parse_scenario(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("", "config must be a JSON object");
  Scenario s;
  s.base_dir = fs::absolute(base_dir);
  s.config = doc;

  const fs::path mesh_path = resolve(s.base_dir, string_of(require(doc, "mesh", ""), "mesh"));
  try {
    s.mesh = load_mesh(mesh_path);
    s.precomp = precompute(s.mesh);
  } catch (const MeshError& e) {
    throw ConfigError("mesh", e.what());
  }
  s.config["mesh"] = mesh_path.string();
  const Index n = s.mesh.node_count();

  if (const json* sets = find(doc, "node_sets")) {
    if (!sets->is_object()) throw ConfigError("node_sets", "expected an object of name: path or index list");
    for (const auto& [name, value] : sets->items()) {
      const std::string path = join("node_sets", name);
      std::vector<Index> nodes;
      if (value.is_string()) {
        const fs::path p = resolve(s.base_dir, value.get<std::string>());
        try {
          nodes = load_node_set(p, n);
        } catch (const Error& e) {
          throw ConfigError(path, e.what());
        }
        s.config["node_sets"][name] = p.string();
      } else if (value.is_array()) {
        for (std::size_t i = 0; i < value.size(); ++i) nodes.push_back(index_of(value[i], join(path, i), n));
      } else {
        throw ConfigError(path, "expected a path or an index list");
      }
      s.node_sets[name] = std::move(nodes);
    }
  }
  auto region = [&](const json& entry, const std::string& path) -> const std::vector<Index>& {
    const std::string name = string_of(require(entry, "region", path), join(path, "region"));
    const auto it = s.node_sets.find(name);
    if (it == s.node_sets.end()) throw ConfigError(join(path, "region"), "unknown node set '" + name + "'");
    return it->second;
  };

  if (const json* m = find(doc, "material")) s.material = parse_material(*m, "material");

  if (const json* p = find(doc, "perfusion")) {
    if (!p->is_object()) throw ConfigError("perfusion", "expected an object");
    s.perfusion.blood_perfusion = number_or(*p, "w_b", 0.0, "perfusion");
    s.perfusion.blood_specific_heat = number_or(*p, "c_b", s.perfusion.blood_specific_heat, "perfusion");
    s.perfusion.arterial_temperature = number_or(*p, "T_a", s.perfusion.arterial_temperature, "perfusion");
    s.perfusion.metabolic_rate = number_or(*p, "Q_met", 0.0, "perfusion");
    try {
      s.perfusion.validate();
    } catch (const Error& e) {
      throw ConfigError("perfusion", e.what());
    }
  }

  if (const json* list = find(doc, "boundary")) {
    if (!list->is_array()) throw ConfigError("boundary", "expected an array");
    for (std::size_t i = 0; i < list->size(); ++i) {
      const json& b = (*list)[i];
      const std::string path = join("boundary", i);
      const std::string kind = string_of(require(b, "kind", path), join(path, "kind"));
      const auto& nodes = region(b, path);
      const std::string name = b["region"].get<std::string>();
      if (kind == "dirichlet") {
        s.bc.dirichlet.push_back({name, nodes, number(require(b, "temperature", path), join(path, "temperature"))});
      } else if (kind == "flux") {
        FluxRegion f;
        f.name = name;
        f.nodes = nodes;
        f.watts_per_node = number(require(b, "watts_per_node", path), join(path, "watts_per_node"));
        f.metabolic = bool_or(b, "metabolic", false, path);
        f.on_time = number_or(b, "on", f.on_time, path);
        f.off_time = number_or(b, "off", f.off_time, path);
        if (!(f.on_time < f.off_time)) throw ConfigError(join(path, "off"), "must be later than 'on'");
        s.bc.fluxes.push_back(std::move(f));
      } else if (kind == "film") {
        FilmRegion f;
        f.name = name;
        f.nodes = nodes;
        f.coefficient = number(require(b, "coefficient", path), join(path, "coefficient"));
        f.area = number_or(b, "area", 1.0, path);
        f.sink_temperature = number_or(b, "sink", s.perfusion.arterial_temperature, path);
        if (f.coefficient < 0) throw ConfigError(join(path, "coefficient"), "must be non-negative");
        if (!(f.area > 0)) throw ConfigError(join(path, "area"), "must be positive");
        s.bc.films.push_back(std::move(f));
      } else {
        throw ConfigError(join(path, "kind"), "expected dirichlet, flux or film, got '" + kind + "'");
      }
    }
  }
  try {
    s.bc.validate(n);
  } catch (const Error& e) {
    throw ConfigError("boundary", e.what());
  }

  const json& sched = require(doc, "schedule", "");
  s.schedule.dt = number(require(sched, "dt", "schedule"), "schedule.dt");
  s.schedule.total_time = number(require(sched, "total_time", "schedule"), "schedule.total_time");
  if (!(s.schedule.dt > 0)) throw ConfigError("schedule.dt", "must be positive");
  if (!(s.schedule.total_time > 0)) throw ConfigError("schedule.total_time", "must be positive");
  if (const json* snaps = find(sched, "snapshot_times")) {
    if (!snaps->is_array()) throw ConfigError("schedule.snapshot_times", "expected an array");
    for (std::size_t i = 0; i < snaps->size(); ++i) {
      const double t = number((*snaps)[i], join("schedule.snapshot_times", i));
      if (t < 0 || t > s.schedule.total_time * (1 + 1e-12))
        throw ConfigError(join("schedule.snapshot_times", i), "outside [0, total_time]");
      s.schedule.snapshot_times.push_back(t);
    }
  }
  if (const json* pi = find(sched, "probe_interval")) {
    if (!pi->is_number_integer() || pi->get<std::int64_t>() < 1)
      throw ConfigError("schedule.probe_interval", "expected a positive integer");
    s.schedule.probe_interval = pi->get<std::int64_t>();
  }
  s.schedule.update_thermal_mass =
      bool_or(doc, "update_thermal_mass", s.material.capacity_depends_on_temperature(), "");
  s.dt_override = bool_or(doc, "dt_override", false, "");

  if (const json* d = find(doc, "deformation")) {
    const std::string kind = string_of(require(*d, "kind", "deformation"), "deformation.kind");
    if (kind == "identity") {
      s.provider = IdentityDeformation{};
    } else if (kind == "affine") {
      AffineDeformation a;
      if (const json* m = find(*d, "A")) a.A = matrix3(*m, "deformation.A");
      if (const json* b = find(*d, "b")) a.b = vector3(*b, "deformation.b");
      if (!(a.A.determinant() > kDeformationDetFloor)) throw ConfigError("deformation.A", "det(A) must be positive");
      s.provider = a;
    } else if (kind == "trajectory") {
      const fs::path p = resolve(s.base_dir, string_of(require(*d, "path", "deformation"), "deformation.path"));
      try {
        s.provider = load_trajectory(p, n);
      } catch (const Error& e) {
        throw ConfigError("deformation.path", e.what());
      }
      s.config["deformation"]["path"] = p.string();
    } else {
      throw ConfigError("deformation.kind", "expected identity, affine or trajectory, got '" + kind + "'");
    }
    if (const json* ramp = find(*d, "ramp")) {
      if (!ramp->is_array()) throw ConfigError("deformation.ramp", "expected [[time, scale], ...]");
      for (std::size_t i = 0; i < ramp->size(); ++i) {
        const json& row = (*ramp)[i];
        const std::string path = join("deformation.ramp", i);
        if (!row.is_array() || row.size() != 2) throw ConfigError(path, "expected [time, scale]");
        const double t = number(row[0], path + "[0]");
        if (!s.schedule.ramp.keyframes.empty() && !(t > s.schedule.ramp.keyframes.back().first))
          throw ConfigError(path, "ramp times must increase");
        s.schedule.ramp.keyframes.emplace_back(t, number(row[1], path + "[1]"));
      }
    }
  }

  if (const json* v = find(doc, "variant")) {
    const auto parsed = parse_variant(string_of(*v, "variant"));
    if (!parsed) throw ConfigError("variant", "unknown formulation '" + v->get<std::string>() + "'");
    s.variant = *parsed;
  }
  if (!s.material.isotropic() && (s.variant == FormulationVariant::ClassicalIsoTempDep ||
                                   s.variant == FormulationVariant::ClassicalIsoTempIndep))
    throw ConfigError("variant", "isotropic formulations need a scalar conductivity");
  s.reference_temperature = number_or(doc, "reference_temperature", s.perfusion.arterial_temperature, "");

  const double t0 = number_or(doc, "initial_temperature", s.perfusion.arterial_temperature, "");
  s.initial_temperature = VectorX::Constant(n, t0);

  if (const json* probes = find(doc, "probes")) {
    if (!probes->is_array()) throw ConfigError("probes", "expected an array of node indices");
    for (std::size_t i = 0; i < probes->size(); ++i) s.probes.push_back(index_of((*probes)[i], join("probes", i), n));
  }
  return s;
}

Scenario load_scenario(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  // A run manifest carries its config with absolute paths.
  if (doc.is_object() && doc.contains("config") && doc.contains("status")) doc = doc["config"];
  return parse_scenario(doc, fs::absolute(path).parent_path());
}

StabilityReport scenario_stability(const Scenario& s, const PowerIterationOptions& options) {
  const ThermalState state =
      build_thermal_state(s.mesh, s.precomp, s.material, s.perfusion, s.bc, s.initial_temperature);
  const ConductionOperator conduction(s.mesh, s.precomp, s.material, s.variant, s.reference_temperature);

  std::set<double> times{0.0};
  const bool deformed = s.variant == FormulationVariant::DeformedAnisoTempDep &&
                        !std::holds_alternative<IdentityDeformation>(s.provider);
  if (deformed) {
    times.insert(s.schedule.total_time);
    if (const auto* traj = std::get_if<TrajectoryDeformation>(&s.provider))
      times.insert(traj->times.begin(), traj->times.end());
    for (const auto& [t, scale] : s.schedule.ramp.keyframes) times.insert(t);
  }

  StabilityReport best;
  bool first = true;
  for (double t : times) {
    if (t < 0 || t > s.schedule.total_time) continue;
    const DeformationState def = scaled_displacements(s.provider, s.schedule.ramp, t, s.mesh);
    const StabilityEstimate est =
        estimate_critical_dt(conduction, state, state.temperature, deformed ? &def : nullptr, options);
    if (first || est.dt_critical < best.estimate.dt_critical) best = {est, t};
    first = false;
  }
  return best;
}

void check_time_step(const Scenario& s, const StabilityReport& report) {
  if (s.schedule.dt > report.estimate.dt_critical && !s.dt_override) {
    throw StabilityError("dt = " + std::to_string(s.schedule.dt) + " s exceeds the critical step " +
                         std::to_string(report.estimate.dt_critical) + " s; set dt_override to run anyway");
  }
}

namespace {

json timings_json(const PhaseTimings& t) {
  return {{"deformation_ms", t.deformation_ms}, {"conduction_ms", t.conduction_ms}, {"update_ms", t.update_ms},
          {"output_ms", t.output_ms},           {"thermal_ms", t.thermal_ms()},     {"total_ms", t.total_ms},
          {"steps", t.steps}};
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

}  // namespace

ScenarioRun run_scenario(const Scenario& s, const fs::path& output_dir, std::ostream* log) {
  ScenarioRun result;
  result.stability = scenario_stability(s);
  const StabilityEstimate& est = result.stability.estimate;
  if (log) {
    *log << "lambda_max = " << est.lambda_max << " 1/s, dt_critical = " << est.dt_critical << " s (t = "
         << result.stability.time << " s" << (est.converged ? "" : ", not converged") << ")\n";
  }
  check_time_step(s, result.stability);
  if (s.schedule.dt > kStabilityWarnFraction * est.dt_critical) {
    result.warned = true;
    if (log) *log << "warning: dt is above " << kStabilityWarnFraction << " of the critical step\n";
  }

  fs::create_directories(output_dir);
  json manifest{{"config", s.config},
                {"stability",
                 {{"lambda_max", est.lambda_max},
                  {"dt_critical", est.dt_critical},
                  {"iterations", est.iterations},
                  {"converged", est.converged},
                  {"time", result.stability.time}}},
                {"variant", std::string(to_string(s.variant))},
                {"snapshots", json::array()}};

  RunOptions options = s.options();
  options.on_snapshot = [&](const Snapshot& snap) {
    write_snapshot_files(output_dir, s.mesh, snap);
    manifest["snapshots"].push_back(snapshot_stem(snap.time));
  };
  try {
    result.record = run(s.inputs(), s.schedule, s.initial_temperature, options);
  } catch (const DivergenceError& e) {
    manifest["status"] = "diverged";
    manifest["error"] = e.what();
    write_json(output_dir / "manifest.json", manifest);
    throw;
  }
  manifest["status"] = "ok";
  manifest["timings"] = timings_json(result.record.timings);
  if (!result.record.probe_nodes.empty()) {
    std::ofstream probes(output_dir / "probes.csv");
    write_probe_csv(probes, result.record);
  }
  write_json(output_dir / "manifest.json", manifest);
  return result;
}

LiverLikeModel make_liver_like(const LiverLikeOptions& opt) {
  LiverLikeModel model;
  BlockSpec spec;
  spec.cells = opt.cells;
  spec.size = opt.size;
  model.mesh = make_block_tets(spec);
  const double height = opt.size.z();

  // Vessel along y near the bottom, heat source sphere above it, indentation
  // bump on the top face. Positions scale with the block size.
  const Vec3 rel = opt.size;
  const double vessel_x = 0.2 * rel.x(), vessel_z = 0.3 * height, vessel_r = 0.075 * rel.x();
  const Vec3 source_c(0.6 * rel.x(), 0.5333333333333333 * rel.y(), 0.65 * height);
  const double source_r = 0.11 * rel.x();
  const double bump_x = 0.5333333333333333 * rel.x(), bump_y = 0.5333333333333333 * rel.y();
  const double bump_r = 0.3333333333333333 * rel.x();
  const double release_z = 0.45 * height;
  const double depth = 0.01 * height / 0.04;

  auto in_vessel = [&](const Vec3& x) { return std::hypot(x.x() - vessel_x, x.z() - vessel_z) <= vessel_r; };
  auto in_source = [&](const Vec3& x) { return (x - source_c).norm() <= source_r && !in_vessel(x); };
  auto bump = [&](const Vec3& x) {
    const double r = std::hypot(x.x() - bump_x, x.y() - bump_y);
    if (r >= bump_r) return 0.0;
    const double c = std::cos(0.5 * std::numbers::pi * r / bump_r);
    return c * c;
  };
  const double top = height - 1e-12 * height;

  model.node_sets["region_a"] = select_nodes(model.mesh, [&](const Vec3& x) { return x.z() >= top && bump(x) > 0; });
  model.node_sets["region_b"] = select_nodes(model.mesh, in_vessel);
  model.node_sets["region_c"] = select_nodes(model.mesh, in_source);
  model.node_sets["region_d"] = select_nodes(model.mesh, in_vessel);
  model.node_sets["region_e"] = select_nodes(model.mesh, [&](const Vec3& x) { return !in_vessel(x); });

  // Indentation fades linearly to zero at release_z so the vessel stays put.
  std::vector<Vec3> pressed(model.mesh.nodes.size(), Vec3::Zero());
  for (std::size_t v = 0; v < pressed.size(); ++v) {
    const Vec3& x = model.mesh.nodes[v];
    const double s = std::max(0.0, (x.z() - release_z) / (height - release_z));
    pressed[v].z() = -depth * bump(x) * s;
  }
  const double half = 0.5 * opt.total_time;
  model.trajectory.times = {0.0, half, opt.total_time};
  model.trajectory.frames = {std::vector<Vec3>(pressed.size(), Vec3::Zero()), pressed,
                             std::vector<Vec3>(pressed.size(), Vec3::Zero())};

  auto nearest = [&](const Vec3& p) {
    Index best = 0;
    for (Index v = 1; v < model.mesh.node_count(); ++v)
      if ((model.mesh.nodes[std::size_t(v)] - p).norm() < (model.mesh.nodes[std::size_t(best)] - p).norm()) best = v;
    return best;
  };
  const std::vector<Index> probes{nearest(source_c), nearest(Vec3(bump_x, bump_y, height)),
                                  nearest(Vec3(vessel_x + 2 * vessel_r, 0.5 * rel.y(), vessel_z)),
                                  nearest(0.5 * rel)};

  std::vector<double> snapshots;
  for (int q = 1; q <= 4; ++q) snapshots.push_back(0.25 * q * opt.total_time);

  model.config = {
      {"mesh", "mesh.txt"},
      {"node_sets",
       {{"region_a", "region_a.txt"},
        {"region_b", "region_b.txt"},
        {"region_c", "region_c.txt"},
        {"region_d", "region_d.txt"},
        {"region_e", "region_e.txt"}}},
      {"material",
       {{"density", 1060.0},
        {"specific_heat", {{37.0, 3600.0}, {65.0, 3800.0}}},
        {"conductivity", {{37.0, 0.53}, {65.0, 0.57}}}}},
      {"perfusion", {{"w_b", 0.0}, {"c_b", 3617.0}, {"T_a", 37.0}, {"Q_met", 0.0}}},
      {"initial_temperature", 37.0},
      {"boundary",
       {{{"region", "region_d"}, {"kind", "dirichlet"}, {"temperature", 37.0}},
        {{"region", "region_c"}, {"kind", "flux"}, {"watts_per_node", 0.2}, {"on", 0.0}, {"off", 0.25 * opt.total_time}},
        {{"region", "region_e"}, {"kind", "flux"}, {"watts_per_node", 0.001263}, {"metabolic", true}},
        {{"region", "region_e"}, {"kind", "film"}, {"coefficient", 0.003595}, {"area", 1.0}, {"sink", 37.0}}}},
      {"deformation", {{"kind", "trajectory"}, {"path", "trajectory.txt"}}},
      {"schedule",
       {{"dt", opt.dt}, {"total_time", opt.total_time}, {"snapshot_times", snapshots}, {"probe_interval", 10}}},
      {"variant", std::string(roman(opt.variant))},
      {"update_thermal_mass", true},
      {"dt_override", false},
      {"probes", probes}};
  return model;
}

fs::path write_liver_like(const LiverLikeModel& model, const fs::path& directory) {
  fs::create_directories(directory);
  {
    std::ofstream out(directory / "mesh.txt");
    out << "# synthetic vascularized tissue block\n";
    write_mesh(out, model.mesh);
  }
  for (const auto& [name, nodes] : model.node_sets) write_node_set(directory / (name + ".txt"), nodes);
  {
    std::ofstream out(directory / "trajectory.txt");
    write_trajectory(out, model.trajectory);
  }
  const fs::path config = directory / "liver_like.json";
  write_json(config, model.config);
  return config;
}

}  // namespace fedbht
