#pragma once

// Experiment configuration: a single versioned JSON document per run.
// Parsing is strict: every failure names the offending key with its dotted
// path, and unknown experiment kinds are rejected up front so a typo cannot
// silently fall through to a default experiment.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "warplab/io.hpp"
#include "warplab/metric.hpp"

namespace warplab {

inline constexpr int config_schema_version = 1;

struct ConfigError : std::runtime_error {
  std::string key;
  ConfigError(const std::string& k, const std::string& what)
      : std::runtime_error("config error at '" + k + "': " + what), key(k) {}
};

namespace cfg_detail {

inline const ojson& require(const ojson& node, const std::string& path, const char* key) {
  if (!node.is_object() || !node.contains(key))
    throw ConfigError(path.empty() ? key : path + "." + key, "missing required key");
  return node.at(key);
}

inline std::string join(const std::string& path, const char* key) {
  return path.empty() ? key : path + "." + key;
}

inline double get_double(const ojson& node, const std::string& path, const char* key) {
  const ojson& v = require(node, path, key);
  if (!v.is_number()) throw ConfigError(join(path, key), "expected a number");
  return v.get<double>();
}

inline double get_double_or(const ojson& node, const std::string& path, const char* key,
                            double fallback) {
  if (!node.is_object() || !node.contains(key)) return fallback;
  return get_double(node, path, key);
}

inline long get_int(const ojson& node, const std::string& path, const char* key) {
  const ojson& v = require(node, path, key);
  if (!v.is_number_integer()) throw ConfigError(join(path, key), "expected an integer");
  return v.get<long>();
}

inline long get_int_or(const ojson& node, const std::string& path, const char* key,
                       long fallback) {
  if (!node.is_object() || !node.contains(key)) return fallback;
  return get_int(node, path, key);
}

inline std::string get_string(const ojson& node, const std::string& path, const char* key) {
  const ojson& v = require(node, path, key);
  if (!v.is_string()) throw ConfigError(join(path, key), "expected a string");
  return v.get<std::string>();
}

inline void check_positive(double v, const std::string& key) {
  if (!(v > 0.0)) throw ConfigError(key, "must be positive");
}

}  // namespace cfg_detail

struct GridSpec {
  int n = 256;
  double length = two_pi;
};

struct FlowSpec {
  double t_end = 0.1;
  double cfl_safety = 0.8;
  long max_steps = 2'000'000;
  double equivalence_limit = 2.0;
  int snapshot_count = 9;
  std::optional<double> fixed_dt;
  double tracker_radius = 0.5;
  int tracker_cadence = 25;
};

struct TubeSpec {
  double center_frac = 0.5;
  double radius = 0.5;
};

struct MoserSuiteSpec {
  int seeds = 100;
  std::vector<double> p_values = {1.001, 1.5, 2.0, 4.0};
  bool adversarial = true;
};

struct SweepSpec {
  std::vector<double> heights;          // smoothing_sweep
  std::vector<double> collapse_factors; // collapse_sweep
  std::string family = "constant";      // collapse_sweep: constant | seeded
  double l2_target = 1e-3;
  double radius = 0.5;
  double t_end = 0.02;
  double width = 0.6;
  double width_jitter = 0.1;
  int workers = 1;
};

struct CalibrateSpec {
  std::vector<ojson> members;
  double drift_tol = 0.10;
  std::string baseline;  // compare against this file when nonempty
};

struct ExperimentConfig {
  std::string kind;
  std::string label;
  std::uint64_t seed = 0;
  bool seed_given = false;
  GridSpec grid;
  ProfileSpec profile = FlatProduct{};
  FlowSpec flow;
  TubeSpec tube;
  MoserSuiteSpec moser;
  SweepSpec sweep;
  CalibrateSpec calibrate;
  double scan_radius = 0.5;
  int sobolev_restarts = 8;
  std::map<std::string, double> tolerances;
  std::string out_dir;
  ojson raw;
};

namespace cfg_detail {

inline GridSpec parse_grid(const ojson& node, const std::string& path) {
  GridSpec g;
  g.n = static_cast<int>(get_int(node, path, "n"));
  if (g.n < 16) throw ConfigError(join(path, "n"), "grid needs at least 16 nodes");
  g.length = get_double(node, path, "length");
  check_positive(g.length, join(path, "length"));
  return g;
}

inline ProfileSpec parse_profile(const ojson& node, const std::string& path) {
  std::string type = get_string(node, path, "type");
  if (type == "flat_product") {
    FlatProduct p;
    p.a0 = get_double_or(node, path, "a0", 1.0);
    p.b0 = get_double_or(node, path, "b0", 1.0);
    check_positive(p.a0, join(path, "a0"));
    check_positive(p.b0, join(path, "b0"));
    return p;
  }
  if (type == "bump") {
    BumpProfile p;
    p.center = get_double(node, path, "center");
    p.height = get_double(node, path, "height");
    p.width = get_double(node, path, "width");
    p.a0 = get_double_or(node, path, "a0", 1.0);
    p.b0 = get_double_or(node, path, "b0", 1.0);
    check_positive(p.width, join(path, "width"));
    check_positive(p.a0, join(path, "a0"));
    check_positive(p.b0, join(path, "b0"));
    return p;
  }
  if (type == "collapsed") {
    CollapsedProfile p;
    p.a0 = get_double(node, path, "a0");
    p.b0 = get_double_or(node, path, "b0", 1.0);
    check_positive(p.a0, join(path, "a0"));
    check_positive(p.b0, join(path, "b0"));
    if (node.contains("bump")) {
      const ojson& bn = node.at("bump");
      BumpProfile b;
      b.center = get_double(bn, join(path, "bump"), "center");
      b.height = get_double(bn, join(path, "bump"), "height");
      b.width = get_double(bn, join(path, "bump"), "width");
      b.a0 = p.a0;
      b.b0 = p.b0;
      check_positive(b.width, join(path, "bump.width"));
      p.bump = b;
    }
    return p;
  }
  throw ConfigError(join(path, "type"),
                    "unknown profile type '" + type +
                        "' (expected flat_product | bump | collapsed)");
}

inline FlowSpec parse_flow(const ojson& node, const std::string& path) {
  FlowSpec f;
  f.t_end = get_double(node, path, "t_end");
  check_positive(f.t_end, join(path, "t_end"));
  f.cfl_safety = get_double_or(node, path, "cfl_safety", f.cfl_safety);
  if (!(f.cfl_safety > 0.0 && f.cfl_safety < 1.0))
    throw ConfigError(join(path, "cfl_safety"), "must lie in (0, 1)");
  f.max_steps = get_int_or(node, path, "max_steps", f.max_steps);
  if (f.max_steps < 1) throw ConfigError(join(path, "max_steps"), "must be at least 1");
  f.equivalence_limit = get_double_or(node, path, "equivalence_limit", f.equivalence_limit);
  if (!(f.equivalence_limit > 1.0))
    throw ConfigError(join(path, "equivalence_limit"), "must exceed 1");
  f.snapshot_count = static_cast<int>(get_int_or(node, path, "snapshot_count", f.snapshot_count));
  if (f.snapshot_count < 3)
    throw ConfigError(join(path, "snapshot_count"), "need at least 3 snapshots");
  if (node.contains("fixed_dt")) {
    double dt = get_double(node, path, "fixed_dt");
    check_positive(dt, join(path, "fixed_dt"));
    f.fixed_dt = dt;
  }
  f.tracker_radius = get_double_or(node, path, "tracker_radius", f.tracker_radius);
  check_positive(f.tracker_radius, join(path, "tracker_radius"));
  f.tracker_cadence = static_cast<int>(get_int_or(node, path, "tracker_cadence", f.tracker_cadence));
  if (f.tracker_cadence < 1) throw ConfigError(join(path, "tracker_cadence"), "must be at least 1");
  return f;
}

}  // namespace cfg_detail

inline ExperimentConfig parse_config(const ojson& doc) {
  using namespace cfg_detail;
  ExperimentConfig cfg;
  cfg.raw = doc;

  long sv = get_int(doc, "", "schema_version");
  if (sv != config_schema_version)
    throw ConfigError("schema_version", "unsupported version " + std::to_string(sv) +
                                            " (this build reads version " +
                                            std::to_string(config_schema_version) + ")");
  cfg.kind = get_string(doc, "", "kind");
  static const std::vector<std::string> kinds = {
      "flow", "moser_verify", "sobolev", "scan", "smoothing_sweep", "collapse_sweep", "calibrate"};
  bool known = false;
  for (const auto& k : kinds) known = known || (k == cfg.kind);
  if (!known) throw ConfigError("kind", "unknown experiment kind '" + cfg.kind + "'");
  cfg.label = doc.contains("label") ? get_string(doc, "", "label") : cfg.kind;

  if (doc.contains("seed")) {
    long s = get_int(doc, "", "seed");
    if (s < 0) throw ConfigError("seed", "must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(s);
    cfg.seed_given = true;
  }
  bool randomized = cfg.kind == "moser_verify" || cfg.kind == "sobolev" ||
                    (cfg.kind == "collapse_sweep" && doc.contains("sweep") &&
                     doc.at("sweep").value("family", "constant") == std::string("seeded"));
  if (randomized && !cfg.seed_given)
    throw ConfigError("seed", "required for randomized suites (kind '" + cfg.kind + "')");

  if (doc.contains("grid")) cfg.grid = parse_grid(doc.at("grid"), "grid");
  if (doc.contains("profile")) cfg.profile = parse_profile(doc.at("profile"), "profile");
  if (doc.contains("flow")) cfg.flow = parse_flow(doc.at("flow"), "flow");

  if (doc.contains("tube")) {
    const ojson& tn = doc.at("tube");
    cfg.tube.center_frac = get_double_or(tn, "tube", "center_frac", cfg.tube.center_frac);
    if (!(cfg.tube.center_frac >= 0.0 && cfg.tube.center_frac < 1.0))
      throw ConfigError("tube.center_frac", "must lie in [0, 1)");
    cfg.tube.radius = get_double(tn, "tube", "radius");
    check_positive(cfg.tube.radius, "tube.radius");
  }
  if (doc.contains("scan")) {
    cfg.scan_radius = get_double(doc.at("scan"), "scan", "radius");
    check_positive(cfg.scan_radius, "scan.radius");
  }
  if (doc.contains("sobolev")) {
    cfg.sobolev_restarts =
        static_cast<int>(get_int_or(doc.at("sobolev"), "sobolev", "restarts", cfg.sobolev_restarts));
    if (cfg.sobolev_restarts < 1)
      throw ConfigError("sobolev.restarts", "must be at least 1");
  }
  if (doc.contains("moser")) {
    const ojson& mn = doc.at("moser");
    cfg.moser.seeds = static_cast<int>(get_int_or(mn, "moser", "seeds", cfg.moser.seeds));
    if (cfg.moser.seeds < 1) throw ConfigError("moser.seeds", "must be at least 1");
    if (mn.contains("p_values")) {
      const ojson& pv = mn.at("p_values");
      if (!pv.is_array() || pv.empty())
        throw ConfigError("moser.p_values", "expected a nonempty array");
      cfg.moser.p_values.clear();
      for (const auto& v : pv) {
        if (!v.is_number() || !(v.get<double>() > 1.0))
          throw ConfigError("moser.p_values", "every entry must be a number above 1");
        cfg.moser.p_values.push_back(v.get<double>());
      }
    }
    if (mn.contains("adversarial")) {
      if (!mn.at("adversarial").is_boolean())
        throw ConfigError("moser.adversarial", "expected a boolean");
      cfg.moser.adversarial = mn.at("adversarial").get<bool>();
    }
  }
  if (doc.contains("sweep")) {
    const ojson& sn = doc.at("sweep");
    auto read_list = [&](const char* key, std::vector<double>& into) {
      if (!sn.contains(key)) return;
      const ojson& arr = sn.at(key);
      if (!arr.is_array() || arr.empty())
        throw ConfigError(std::string("sweep.") + key, "expected a nonempty array");
      into.clear();
      for (const auto& v : arr) {
        if (!v.is_number() || !(v.get<double>() > 0.0))
          throw ConfigError(std::string("sweep.") + key, "every entry must be a positive number");
        into.push_back(v.get<double>());
      }
    };
    read_list("heights", cfg.sweep.heights);
    read_list("collapse_factors", cfg.sweep.collapse_factors);
    if (sn.contains("family")) {
      cfg.sweep.family = get_string(sn, "sweep", "family");
      if (cfg.sweep.family != "constant" && cfg.sweep.family != "seeded")
        throw ConfigError("sweep.family", "expected 'constant' or 'seeded'");
    }
    cfg.sweep.l2_target = get_double_or(sn, "sweep", "l2_target", cfg.sweep.l2_target);
    check_positive(cfg.sweep.l2_target, "sweep.l2_target");
    cfg.sweep.radius = get_double_or(sn, "sweep", "radius", cfg.sweep.radius);
    check_positive(cfg.sweep.radius, "sweep.radius");
    cfg.sweep.t_end = get_double_or(sn, "sweep", "t_end", cfg.sweep.t_end);
    check_positive(cfg.sweep.t_end, "sweep.t_end");
    cfg.sweep.width = get_double_or(sn, "sweep", "width", cfg.sweep.width);
    check_positive(cfg.sweep.width, "sweep.width");
    cfg.sweep.width_jitter = get_double_or(sn, "sweep", "width_jitter", cfg.sweep.width_jitter);
    if (!(cfg.sweep.width_jitter >= 0.0 && cfg.sweep.width_jitter < 1.0))
      throw ConfigError("sweep.width_jitter", "must lie in [0, 1)");
    cfg.sweep.workers = static_cast<int>(get_int_or(sn, "sweep", "workers", cfg.sweep.workers));
    if (cfg.sweep.workers < 1) throw ConfigError("sweep.workers", "must be at least 1");
  }
  if (cfg.kind == "smoothing_sweep" && cfg.sweep.heights.empty())
    throw ConfigError("sweep.heights", "missing required key");
  if (cfg.kind == "collapse_sweep" && cfg.sweep.collapse_factors.empty())
    throw ConfigError("sweep.collapse_factors", "missing required key");

  if (cfg.kind == "calibrate") {
    const ojson& cn = require(doc, "", "calibrate");
    const ojson& mm = require(cn, "calibrate", "members");
    if (!mm.is_array() || mm.empty())
      throw ConfigError("calibrate.members", "expected a nonempty array of member configs");
    for (const auto& member : mm) cfg.calibrate.members.push_back(member);
    cfg.calibrate.drift_tol = get_double_or(cn, "calibrate", "drift_tol", cfg.calibrate.drift_tol);
    check_positive(cfg.calibrate.drift_tol, "calibrate.drift_tol");
    if (cn.contains("baseline")) cfg.calibrate.baseline = get_string(cn, "calibrate", "baseline");
  }

  if (doc.contains("tolerances")) {
    const ojson& tn = doc.at("tolerances");
    if (!tn.is_object()) throw ConfigError("tolerances", "expected an object");
    for (auto it = tn.begin(); it != tn.end(); ++it) {
      if (!it.value().is_number() || !(it.value().get<double>() > 0.0))
        throw ConfigError("tolerances." + it.key(), "must be positive");
      cfg.tolerances[it.key()] = it.value().get<double>();
    }
  }
  if (doc.contains("out_dir")) cfg.out_dir = get_string(doc, "", "out_dir");
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    throw ConfigError(path.string(), "config file not found");
  ojson doc;
  try {
    doc = read_json(path);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string(), std::string("not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

inline double tolerance_or(const ExperimentConfig& cfg, const std::string& name, double fallback) {
  auto it = cfg.tolerances.find(name);
  return it == cfg.tolerances.end() ? fallback : it->second;
}

}  // namespace warplab
