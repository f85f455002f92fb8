#include "vortexlab/config.hpp"

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <json.hpp>

namespace vortexlab {

using json = nlohmann::json;

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::pointvortex: return "pointvortex";
    case RunMode::simulate: return "simulate";
    case RunMode::sweep: return "sweep";
    case RunMode::metrics: return "metrics";
  }
  return "simulate";
}

RunMode run_mode_from_string(const std::string& name) {
  if (name == "pointvortex") return RunMode::pointvortex;
  if (name == "simulate") return RunMode::simulate;
  if (name == "sweep") return RunMode::sweep;
  if (name == "metrics") return RunMode::metrics;
  throw ValidationError("mode", "must be one of pointvortex, simulate, sweep, metrics");
}

namespace {

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ValidationError(where.empty() ? "config" : where, "must be a JSON object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!keys.count(key)) throw ValidationError(where.empty() ? key : where + "." + key, "unknown key");
  }
}

double get_number(const json& v, const std::string& field) {
  if (!v.is_number()) throw ValidationError(field, "must be a number");
  return v.get<double>();
}

bool get_bool(const json& v, const std::string& field) {
  if (!v.is_boolean()) throw ValidationError(field, "must be true or false");
  return v.get<bool>();
}

std::uint64_t get_count(const json& v, const std::string& field) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
    throw ValidationError(field, "must be a nonnegative integer");
  return v.get<std::uint64_t>();
}

std::string get_string(const json& v, const std::string& field) {
  if (!v.is_string()) throw ValidationError(field, "must be a string");
  return v.get<std::string>();
}

Vec2d get_point(const json& v, const std::string& field) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ValidationError(field, "must be a pair of numbers [x, y]");
  return Vec2d(v[0].get<double>(), v[1].get<double>());
}

json point(const Vec2d& x) { return json::array({x.x(), x.y()}); }

void parse_numerics(const json& j, NumericsConfig& n) {
  reject_unknown(j, "numerics",
                 {"dt", "horizon", "particles_per_core", "pitch", "blob_factor", "theta", "crossover", "leaf_size",
                  "deterministic", "seed", "grid_jitter", "cadence", "steps_per_core_turn", "collision_floor",
                  "tail_monitor"});
  for (const auto& [key, v] : j.items()) {
    const std::string f = "numerics." + key;
    if (key == "dt") n.dt = get_number(v, f);
    else if (key == "horizon") n.horizon = get_number(v, f);
    else if (key == "particles_per_core") n.particles_per_core = get_number(v, f);
    else if (key == "pitch") n.pitch = get_number(v, f);
    else if (key == "blob_factor") n.blob_factor = get_number(v, f);
    else if (key == "theta") n.theta = get_number(v, f);
    else if (key == "crossover") n.crossover = get_count(v, f);
    else if (key == "leaf_size") n.leaf_size = get_count(v, f);
    else if (key == "deterministic") n.deterministic = get_bool(v, f);
    else if (key == "seed") n.seed = get_count(v, f);
    else if (key == "grid_jitter") n.grid_jitter = get_number(v, f);
    else if (key == "cadence") n.cadence = get_number(v, f);
    else if (key == "steps_per_core_turn") n.steps_per_core_turn = get_number(v, f);
    else if (key == "collision_floor") n.collision_floor = get_number(v, f);
    else if (key == "tail_monitor") n.tail_monitor = get_bool(v, f);
  }
}

void parse_metrics(const json& j, MetricsConfig& m) {
  reject_unknown(j, "metrics", {"cloud", "measures", "targets", "rho", "delta_r", "blob_radius"});
  for (const auto& [key, v] : j.items()) {
    const std::string f = "metrics." + key;
    if (key == "cloud") {
      m.cloud = get_string(v, f);
    } else if (key == "measures") {
      if (!v.is_array()) throw ValidationError(f, "must be an array of file names");
      for (const auto& e : v) m.measures.push_back(get_string(e, f));
    } else if (key == "targets") {
      if (!v.is_array()) throw ValidationError(f, "must be an array of points");
      for (const auto& e : v) m.targets.push_back(get_point(e, f));
    } else if (key == "rho") {
      m.rho = get_number(v, f);
    } else if (key == "delta_r") {
      m.delta_r = get_number(v, f);
    } else if (key == "blob_radius") {
      m.blob_radius = get_number(v, f);
    }
  }
}

}  // namespace

void RunConfig::validate() const {
  if (output.empty()) throw ValidationError("output", "must not be empty");
  switch (mode) {
    case RunMode::pointvortex: {
      if (spec.centers.empty()) throw ValidationError("vortices", "at least one vortex is required");
      spec.validate_parameters();
      numerics.validate();
      PointVortexState<double> state;
      for (std::size_t i = 0; i < spec.size(); ++i) {
        state.positions.push_back(spec.pv_start(i));
        state.intensities.push_back(spec.intensities[i]);
      }
      state.validate();
      break;
    }
    case RunMode::simulate:
      spec.validate();
      numerics.validate();
      if (numerics.pitch.value_or(spec.epsilon / numerics.particles_per_core) > spec.epsilon / 4.0)
        throw ValidationError(numerics.pitch ? "numerics.pitch" : "numerics.particles_per_core",
                              "sampling pitch must be at most epsilon/4");
      break;
    case RunMode::sweep: {
      if (epsilons.empty()) throw ValidationError("epsilons", "a sweep needs at least one epsilon");
      for (std::size_t k = 0; k < epsilons.size(); ++k) {
        if (!(epsilons[k] > 0.0)) throw ValidationError("epsilons", "values must be positive");
        if (epsilons[k] > spec.support_radius) throw ValidationError("epsilons", "values must not exceed R");
        if (k > 0 && !(epsilons[k] < epsilons[k - 1]))
          throw ValidationError("epsilons", "must be strictly decreasing");
      }
      InitialDataSpec first = spec;
      first.epsilon = epsilons.front();
      first.validate();
      numerics.validate();
      if (numerics.particles_per_core < 4.0)
        throw ValidationError("numerics.particles_per_core", "must be at least 4 (pitch <= epsilon/4)");
      break;
    }
    case RunMode::metrics:
      if (!metrics.cloud && metrics.measures.empty())
        throw ValidationError("metrics", "needs a cloud file or a pair of measure files");
      if (!metrics.measures.empty() && metrics.measures.size() != 2)
        throw ValidationError("metrics.measures", "must name exactly two files");
      if (metrics.rho && !(*metrics.rho > 0.0)) throw ValidationError("metrics.rho", "must be positive");
      if (metrics.delta_r && !(*metrics.delta_r > 0.0)) throw ValidationError("metrics.delta_r", "must be positive");
      if (!(metrics.blob_radius >= 0.0)) throw ValidationError("metrics.blob_radius", "must be >= 0");
      spec.validate_parameters();
      break;
  }
}

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigParseError(e.byte, e.what());
  }
  reject_unknown(doc, "",
                 {"mode", "vortices", "epsilon", "epsilons", "R", "delta", "p", "gamma", "lambda", "profile",
                  "tail_fraction", "numerics", "output", "metrics"});
  RunConfig c;
  if (!doc.contains("mode")) throw ValidationError("mode", "is required");
  c.mode = run_mode_from_string(get_string(doc["mode"], "mode"));
  bool any_offset = false;
  for (const auto& [key, v] : doc.items()) {
    if (key == "vortices") {
      if (!v.is_array()) throw ValidationError("vortices", "must be an array");
      for (const auto& e : v) {
        reject_unknown(e, "vortices", {"center", "intensity", "offset"});
        if (!e.contains("center")) throw ValidationError("vortices.center", "is required");
        if (!e.contains("intensity")) throw ValidationError("vortices.intensity", "is required");
        c.spec.centers.push_back(get_point(e["center"], "vortices.center"));
        c.spec.intensities.push_back(get_number(e["intensity"], "vortices.intensity"));
        any_offset = any_offset || e.contains("offset");
      }
    } else if (key == "epsilon") {
      c.spec.epsilon = get_number(v, key);
    } else if (key == "epsilons") {
      if (!v.is_array()) throw ValidationError("epsilons", "must be an array of numbers");
      for (const auto& e : v) c.epsilons.push_back(get_number(e, key));
    } else if (key == "R") {
      c.spec.support_radius = get_number(v, key);
    } else if (key == "delta") {
      c.spec.separation = get_number(v, key);
    } else if (key == "p") {
      c.spec.p = get_number(v, key);
    } else if (key == "gamma") {
      c.spec.gamma = get_number(v, key);
    } else if (key == "lambda") {
      c.spec.lambda = get_number(v, key);
    } else if (key == "profile") {
      c.spec.profile = profile_from_string(get_string(v, key));
    } else if (key == "tail_fraction") {
      c.spec.tail_exponent = get_number(v, key);
    } else if (key == "numerics") {
      parse_numerics(v, c.numerics);
    } else if (key == "output") {
      c.output = get_string(v, key);
    } else if (key == "metrics") {
      parse_metrics(v, c.metrics);
    }
  }
  if (any_offset) {
    for (const auto& e : doc["vortices"])
      c.spec.pv_offsets.push_back(e.contains("offset") ? get_point(e["offset"], "vortices.offset") : Vec2d::Zero());
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& c) {
  json doc;
  doc["mode"] = to_string(c.mode);
  json vortices = json::array();
  for (std::size_t i = 0; i < c.spec.size(); ++i) {
    json v;
    v["center"] = point(c.spec.centers[i]);
    v["intensity"] = c.spec.intensities[i];
    if (!c.spec.pv_offsets.empty()) v["offset"] = point(c.spec.pv_offsets[i]);
    vortices.push_back(v);
  }
  doc["vortices"] = vortices;
  doc["epsilon"] = c.spec.epsilon;
  if (!c.epsilons.empty()) doc["epsilons"] = c.epsilons;
  doc["R"] = c.spec.support_radius;
  doc["delta"] = c.spec.separation;
  doc["p"] = c.spec.p;
  if (c.spec.gamma) doc["gamma"] = *c.spec.gamma;
  doc["lambda"] = c.spec.lambda;
  doc["profile"] = to_string(c.spec.profile);
  doc["tail_fraction"] = c.spec.tail_exponent;

  const NumericsConfig& n = c.numerics;
  json num;
  num["dt"] = n.dt;
  num["horizon"] = n.horizon;
  num["particles_per_core"] = n.particles_per_core;
  if (n.pitch) num["pitch"] = *n.pitch;
  num["blob_factor"] = n.blob_factor;
  num["theta"] = n.theta;
  num["crossover"] = n.crossover;
  num["leaf_size"] = n.leaf_size;
  num["deterministic"] = n.deterministic;
  num["seed"] = n.seed;
  num["grid_jitter"] = n.grid_jitter;
  num["cadence"] = n.cadence;
  num["steps_per_core_turn"] = n.steps_per_core_turn;
  if (n.collision_floor) num["collision_floor"] = *n.collision_floor;
  num["tail_monitor"] = n.tail_monitor;
  doc["numerics"] = num;
  doc["output"] = c.output;

  const MetricsConfig& m = c.metrics;
  if (m.cloud || !m.measures.empty() || !m.targets.empty() || m.rho || m.delta_r || m.blob_radius != 0.0) {
    json mj = json::object();
    if (m.cloud) mj["cloud"] = *m.cloud;
    if (!m.measures.empty()) mj["measures"] = m.measures;
    if (!m.targets.empty()) {
      json t = json::array();
      for (const auto& x : m.targets) t.push_back(point(x));
      mj["targets"] = t;
    }
    if (m.rho) mj["rho"] = *m.rho;
    if (m.delta_r) mj["delta_r"] = *m.delta_r;
    mj["blob_radius"] = m.blob_radius;
    doc["metrics"] = mj;
  }
  return doc.dump(2) + "\n";
}

}  // namespace vortexlab
