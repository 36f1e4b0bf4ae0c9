#include "mmpc/scenario.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "mmpc/errors.hpp"
#include "mmpc/ugv.hpp"

namespace mmpc {

namespace {

using nlohmann::json;

constexpr std::string_view kBundledText[] = {
#include "mmpc/bundled_scenarios.inc"
};

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ConfigError(where + ": missing required key '" + key + "'");
  }
  return obj.at(key);
}

template <typename T>
T get_as(const json& value, const std::string& where) {
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + ": wrong value type");
  }
}

template <typename T>
T value_or(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  return get_as<T>(obj.at(key), where + "." + key);
}

Eigen::VectorXd vector_of(const json& value, const std::string& where) {
  if (!value.is_array()) throw ConfigError(where + ": expected an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(value.size()));
  for (std::size_t i = 0; i < value.size(); ++i) {
    if (!value[i].is_number()) throw ConfigError(where + ": expected an array of numbers");
    v(static_cast<Eigen::Index>(i)) = value[i].get<double>();
  }
  return v;
}

template <int Size>
Eigen::Matrix<double, Size, 1> fixed_vector(const json& value, const std::string& where) {
  const Eigen::VectorXd v = vector_of(value, where);
  if (v.size() != Size) {
    throw ConfigError(where + ": expected " + std::to_string(Size) + " numbers");
  }
  return v;
}

Eigen::MatrixXd weight_of(const json& obj, const std::string& base, const std::string& where) {
  const std::string diag_key = base + "_diag";
  if (obj.contains(diag_key)) {
    return vector_of(obj.at(diag_key), where + "." + diag_key).asDiagonal();
  }
  if (!obj.contains(base)) {
    throw ConfigError(where + ": missing '" + diag_key + "' or '" + base + "'");
  }
  const json& rows = obj.at(base);
  if (!rows.is_array() || rows.empty()) throw ConfigError(where + "." + base + ": expected a matrix");
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd W(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd row = vector_of(rows[static_cast<std::size_t>(i)], where + "." + base);
    if (row.size() != n) throw ConfigError(where + "." + base + ": matrix must be square");
    W.row(i) = row.transpose();
  }
  return W;
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

void put_weight(json& obj, const std::string& base, const Eigen::MatrixXd& W) {
  const bool diagonal = (W - Eigen::MatrixXd(W.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
  if (diagonal) {
    obj[base + "_diag"] = vector_json(W.diagonal());
    return;
  }
  json rows = json::array();
  for (Eigen::Index i = 0; i < W.rows(); ++i) rows.push_back(vector_json(W.row(i).transpose()));
  obj[base] = rows;
}

YawPolicy yaw_of(const std::string& name) {
  if (name == "fixed_zero") return YawPolicy::FixedZero;
  if (name == "path_tangent") return YawPolicy::PathTangent;
  throw ConfigError("reference.yaw: expected 'fixed_zero' or 'path_tangent', got '" + name + "'");
}

SurfaceSpec parse_surface(const json& s) {
  const std::string where = "system.surface";
  SurfaceSpec spec;
  const std::string source = get_as<std::string>(require(s, "source", where), where + ".source");
  auto coefficients = [&]() {
    const Eigen::VectorXd c = vector_of(require(s, "coefficients", where), where + ".coefficients");
    if (c.size() != 6) throw ConfigError(where + ".coefficients: expected 6 numbers");
    SurfaceModel::Coefficients out{};
    for (int i = 0; i < 6; ++i) out[static_cast<std::size_t>(i)] = c(i);
    return out;
  };
  if (source == "coefficients") {
    spec.source = SurfaceSpec::Source::Coefficients;
    spec.coefficients = coefficients();
  } else if (source == "synthesized") {
    spec.source = SurfaceSpec::Source::Synthesized;
    spec.coefficients = coefficients();
    spec.lower_m = fixed_vector<2>(require(s, "lower_m", where), where + ".lower_m");
    spec.upper_m = fixed_vector<2>(require(s, "upper_m", where), where + ".upper_m");
    spec.spacing_m = value_or(s, "spacing_m", spec.spacing_m, where);
    spec.noise_std_m = value_or(s, "noise_std_m", spec.noise_std_m, where);
    spec.seed = value_or<std::uint64_t>(s, "seed", 0, where);
  } else if (source == "file") {
    spec.source = SurfaceSpec::Source::File;
    spec.samples_file = get_as<std::string>(require(s, "samples_file", where), where + ".samples_file");
  } else {
    throw ConfigError(where + ".source: expected 'coefficients', 'synthesized' or 'file'");
  }
  return spec;
}

json surface_json(const SurfaceSpec& spec) {
  json s;
  json coeffs = json::array();
  for (double c : spec.coefficients) coeffs.push_back(c);
  switch (spec.source) {
    case SurfaceSpec::Source::Coefficients:
      s["source"] = "coefficients";
      s["coefficients"] = coeffs;
      break;
    case SurfaceSpec::Source::Synthesized:
      s["source"] = "synthesized";
      s["coefficients"] = coeffs;
      s["lower_m"] = vector_json(spec.lower_m);
      s["upper_m"] = vector_json(spec.upper_m);
      s["spacing_m"] = spec.spacing_m;
      s["noise_std_m"] = spec.noise_std_m;
      s["seed"] = spec.seed;
      break;
    case SurfaceSpec::Source::File:
      s["source"] = "file";
      s["samples_file"] = spec.samples_file.generic_string();
      break;
  }
  return s;
}

int state_dim_of(const std::string& type) { return type == "quadrotor" ? 9 : 3; }
int input_dim_of(const std::string& type) { return type == "quadrotor" ? 4 : 2; }

TraceLayout quad_layout() {
  TraceLayout layout;
  layout.state_labels = {"px", "py", "pz", "vx", "vy", "vz", "r11", "r21", "r31",
                         "r12", "r22", "r32", "r13", "r23", "r33"};
  layout.error_labels = {"px", "py", "pz", "vx", "vy", "vz", "thx", "thy", "thz"};
  layout.input_labels = {"thrust", "wx", "wy", "wz"};
  layout.position_offset = 0;
  layout.attitude_offset = 6;
  layout.attitude_dim = 3;
  return layout;
}

TraceLayout ugv_layout() {
  TraceLayout layout;
  layout.state_labels = {"px", "py", "pz", "r11", "r21", "r12", "r22"};
  layout.error_labels = {"px", "py", "psi"};
  layout.input_labels = {"vx", "wz"};
  layout.position_offset = 0;
  layout.attitude_offset = 2;
  layout.attitude_dim = 1;
  return layout;
}

}  // namespace

void Scenario::validate() const {
  if (system.type != "quadrotor" && system.type != "ugv") {
    throw ConfigError("system.type: expected 'quadrotor' or 'ugv', got '" + system.type + "'");
  }
  if (system.type == "ugv" && !system.surface) throw ConfigError("system.surface: required for a ugv");
  if (!(system.gravity_mps2 > 0.0)) throw ConfigError("system.gravity_mps2 must be positive");
  const int n = state_dim_of(system.type);
  const int m = input_dim_of(system.type);
  mpc.validate(n, m);
  if (substeps < 1) throw ConfigError("truth_substeps must be at least 1");
  if (!(duration_s > 0.0)) throw ConfigError("duration_s must be positive");
  const double steps = duration_s / mpc.dt;
  if (std::abs(steps - std::round(steps)) > 1e-6) {
    throw ConfigError("duration_s must be a whole number of control steps dt_s");
  }
  if (initial_offset.size() != 0 && initial_offset.size() != n) {
    throw ConfigError("initial_offset: expected " + std::to_string(n) + " numbers");
  }
  const int l = n;
  if (disturbance.f_std.size() != 0) {
    if (disturbance.f_std.size() != l) {
      throw ConfigError("disturbance.f_std: expected " + std::to_string(l) + " numbers");
    }
    if ((disturbance.f_std.array() < 0.0).any()) {
      throw ConfigError("disturbance.f_std: standard deviations must be non-negative");
    }
  }
  const bool quad_ref = reference.generator.rfind("quad-", 0) == 0;
  if (reference.generator != "quad-hover" && reference.generator != "quad-circle" &&
      reference.generator != "quad-loop" && reference.generator != "ugv-path") {
    throw ConfigError("reference.generator: unknown generator '" + reference.generator + "'");
  }
  if (quad_ref != (system.type == "quadrotor")) {
    throw ConfigError("reference.generator '" + reference.generator + "' does not fit a " +
                      system.type);
  }
  if (reference.generator == "ugv-path" && reference.path != "straight" &&
      reference.path != "circle" && reference.path != "sine") {
    throw ConfigError("reference.path: expected 'straight', 'circle' or 'sine'");
  }
}

Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");

  Scenario sc;
  sc.base_dir = base_dir;
  sc.id = get_as<std::string>(require(doc, "id", "config"), "id");
  sc.description = value_or<std::string>(doc, "description", "", "config");

  const json& sys = require(doc, "system", "config");
  sc.system.type = get_as<std::string>(require(sys, "type", "system"), "system.type");
  sc.system.gravity_mps2 = value_or(sys, "gravity_mps2", sc.system.gravity_mps2, "system");
  if (sys.contains("surface")) sc.system.surface = parse_surface(sys.at("surface"));

  const json& mpc = require(doc, "mpc", "config");
  sc.mpc.horizon = get_as<int>(require(mpc, "horizon", "mpc"), "mpc.horizon");
  sc.mpc.dt = get_as<double>(require(mpc, "dt_s", "mpc"), "mpc.dt_s");
  sc.mpc.state_weights = {weight_of(mpc, "state_weight", "mpc")};
  sc.mpc.input_weights = {weight_of(mpc, "input_weight", "mpc")};
  if (mpc.contains("terminal_weight_diag") || mpc.contains("terminal_weight")) {
    sc.mpc.terminal_weight = weight_of(mpc, "terminal_weight", "mpc");
  }
  sc.mpc.u_min = vector_of(require(mpc, "u_min", "mpc"), "mpc.u_min");
  sc.mpc.u_max = vector_of(require(mpc, "u_max", "mpc"), "mpc.u_max");
  sc.mpc.tolerance = value_or(mpc, "solver_tolerance", sc.mpc.tolerance, "mpc");
  sc.mpc.max_iterations = value_or(mpc, "solver_max_iterations", sc.mpc.max_iterations, "mpc");

  const json& ref = require(doc, "reference", "config");
  const std::string rw = "reference";
  sc.reference.generator = get_as<std::string>(require(ref, "generator", rw), "reference.generator");
  if (ref.contains("center_m")) sc.reference.center_m = fixed_vector<3>(ref.at("center_m"), "reference.center_m");
  sc.reference.radius_m = value_or(ref, "radius_m", sc.reference.radius_m, rw);
  sc.reference.max_speed_mps = value_or(ref, "max_speed_mps", sc.reference.max_speed_mps, rw);
  sc.reference.ramp_time_s = value_or(ref, "ramp_time_s", sc.reference.ramp_time_s, rw);
  if (ref.contains("yaw")) sc.reference.yaw = yaw_of(get_as<std::string>(ref.at("yaw"), "reference.yaw"));
  sc.reference.speed_mps = value_or(ref, "speed_mps", sc.reference.speed_mps, rw);
  sc.reference.path = value_or<std::string>(ref, "path", sc.reference.path, rw);
  if (ref.contains("origin_m")) sc.reference.origin_m = fixed_vector<2>(ref.at("origin_m"), "reference.origin_m");
  sc.reference.heading_rad = value_or(ref, "heading_rad", sc.reference.heading_rad, rw);
  sc.reference.amplitude_m = value_or(ref, "amplitude_m", sc.reference.amplitude_m, rw);
  sc.reference.wavelength_m = value_or(ref, "wavelength_m", sc.reference.wavelength_m, rw);

  if (doc.contains("initial_offset")) {
    sc.initial_offset = vector_of(doc.at("initial_offset"), "initial_offset");
  }
  if (doc.contains("disturbance")) {
    const json& d = doc.at("disturbance");
    if (d.contains("f_std")) sc.disturbance.f_std = vector_of(d.at("f_std"), "disturbance.f_std");
    sc.disturbance.seed = value_or<std::uint64_t>(d, "seed", 0, "disturbance");
  }
  sc.duration_s = get_as<double>(require(doc, "duration_s", "config"), "duration_s");
  sc.substeps = value_or(doc, "truth_substeps", 1, "config");

  sc.validate();
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.parent_path());
}

std::string scenario_to_json(const Scenario& sc) {
  json doc;
  doc["id"] = sc.id;
  doc["description"] = sc.description;
  json sys;
  sys["type"] = sc.system.type;
  sys["gravity_mps2"] = sc.system.gravity_mps2;
  if (sc.system.surface) sys["surface"] = surface_json(*sc.system.surface);
  doc["system"] = sys;

  json mpc;
  mpc["horizon"] = sc.mpc.horizon;
  mpc["dt_s"] = sc.mpc.dt;
  put_weight(mpc, "state_weight", sc.mpc.state_weight(0));
  if (sc.mpc.terminal_weight) put_weight(mpc, "terminal_weight", *sc.mpc.terminal_weight);
  put_weight(mpc, "input_weight", sc.mpc.input_weight(0));
  mpc["u_min"] = vector_json(sc.mpc.u_min);
  mpc["u_max"] = vector_json(sc.mpc.u_max);
  mpc["solver_tolerance"] = sc.mpc.tolerance;
  mpc["solver_max_iterations"] = sc.mpc.max_iterations;
  doc["mpc"] = mpc;

  const ReferenceSpec& r = sc.reference;
  json ref;
  ref["generator"] = r.generator;
  if (r.generator == "ugv-path") {
    ref["path"] = r.path;
    ref["speed_mps"] = r.speed_mps;
    ref["origin_m"] = vector_json(r.origin_m);
    ref["heading_rad"] = r.heading_rad;
    if (r.path == "circle") ref["radius_m"] = r.radius_m;
    if (r.path == "sine") {
      ref["amplitude_m"] = r.amplitude_m;
      ref["wavelength_m"] = r.wavelength_m;
    }
  } else {
    ref["center_m"] = vector_json(r.center_m);
    if (r.generator == "quad-circle") {
      ref["radius_m"] = r.radius_m;
      ref["max_speed_mps"] = r.max_speed_mps;
      ref["ramp_time_s"] = r.ramp_time_s;
      ref["yaw"] = r.yaw == YawPolicy::FixedZero ? "fixed_zero" : "path_tangent";
    } else if (r.generator == "quad-loop") {
      ref["radius_m"] = r.radius_m;
      ref["speed_mps"] = r.speed_mps;
    }
  }
  doc["reference"] = ref;

  if (sc.initial_offset.size() != 0) doc["initial_offset"] = vector_json(sc.initial_offset);
  if (sc.disturbance.f_std.size() != 0) {
    doc["disturbance"] = {{"f_std", vector_json(sc.disturbance.f_std)}, {"seed", sc.disturbance.seed}};
  }
  doc["duration_s"] = sc.duration_s;
  doc["truth_substeps"] = sc.substeps;
  return doc.dump(2) + "\n";
}

const std::vector<BundledScenario>& bundled_scenarios() {
  static const std::vector<BundledScenario> list = [] {
    std::vector<BundledScenario> out;
    for (std::string_view text : kBundledText) {
      const Scenario sc = parse_scenario(text);
      out.push_back({sc.id, sc.description, text});
    }
    return out;
  }();
  return list;
}

Scenario bundled_scenario(std::string_view id) {
  for (const auto& b : bundled_scenarios()) {
    if (b.id == id) return parse_scenario(b.json);
  }
  throw ConfigError("unknown scenario '" + std::string(id) + "'");
}

Scenario resolve_scenario(std::string_view id_or_path) {
  for (const auto& b : bundled_scenarios()) {
    if (b.id == id_or_path) return parse_scenario(b.json);
  }
  const std::filesystem::path path{std::string(id_or_path)};
  if (!std::filesystem::exists(path)) {
    throw ConfigError("'" + std::string(id_or_path) +
                      "' is neither a bundled scenario nor an existing config file");
  }
  return load_scenario(path);
}

ScenarioSetup build_setup(const Scenario& sc) {
  sc.validate();
  ScenarioSetup setup;
  const long ticks = std::lround(sc.duration_s / sc.mpc.dt);
  const int count = static_cast<int>(ticks) + sc.mpc.horizon;
  const ReferenceSpec& r = sc.reference;

  if (sc.system.type == "quadrotor") {
    const QuadrotorParams params{sc.system.gravity_mps2};
    setup.system = quad_system(params);
    setup.layout = quad_layout();
    QuadTrajectory traj;
    if (r.generator == "quad-hover") {
      traj = hover_trajectory(r.center_m);
    } else if (r.generator == "quad-circle") {
      traj = circle_trajectory(r.radius_m, SpeedProfile{r.max_speed_mps, r.ramp_time_s}, r.yaw,
                               r.center_m);
    } else {
      traj = loop_trajectory(r.radius_m, r.speed_mps, r.center_m);
    }
    setup.references = quad_reference_sequence(traj, params, sc.mpc.dt, count);
    return setup;
  }

  const SurfaceSpec& s = *sc.system.surface;
  SurfaceModel surface;
  if (s.source == SurfaceSpec::Source::Coefficients) {
    surface = SurfaceModel(s.coefficients);
  } else {
    std::vector<Eigen::Vector3d> samples;
    if (s.source == SurfaceSpec::Source::Synthesized) {
      samples = synthesize_surface_samples(SurfaceModel(s.coefficients), s.lower_m, s.upper_m,
                                           s.spacing_m, s.noise_std_m, s.seed);
    } else {
      const auto path = s.samples_file.is_absolute() ? s.samples_file : sc.base_dir / s.samples_file;
      samples = read_surface_samples(path);
    }
    const SurfaceFit fit = fit_surface(samples);
    surface = fit.model;
    setup.surface_fit_rms = fit.residual_rms;
  }
  setup.surface = surface;
  setup.system = ugv_system(surface);
  setup.layout = ugv_layout();

  Path2d path;
  if (r.path == "straight") {
    path = straight_path(r.origin_m, r.heading_rad);
  } else if (r.path == "circle") {
    path = circle_path(r.origin_m, r.radius_m, r.heading_rad);
  } else {
    path = sine_path(r.origin_m, r.heading_rad, r.amplitude_m, r.wavelength_m);
  }
  UgvReferenceLimits limits;
  limits.v_max = sc.mpc.u_max(0);
  limits.omega_max = std::min(std::abs(sc.mpc.u_min(1)), std::abs(sc.mpc.u_max(1)));
  setup.references = ugv_reference(path, surface, r.speed_mps, sc.mpc.dt, count, limits);
  return setup;
}

SimTrace rollout(const Scenario& sc) {
  const ScenarioSetup setup = build_setup(sc);
  RolloutOptions options;
  options.duration = sc.duration_s;
  options.substeps = sc.substeps;
  options.initial_offset = sc.initial_offset;
  options.disturbance = sc.disturbance;
  SimTrace trace = rollout(setup.system, sc.mpc, setup.references, options, setup.layout);
  trace.scenario = sc.id;
  return trace;
}

}  // namespace mmpc
