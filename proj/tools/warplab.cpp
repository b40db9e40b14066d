// Command-line front end.  Every failure path exits nonzero and writes one
// machine-parsable JSON error record to stderr; the success path writes a
// single JSON result line to stdout.  Exit codes: 0 success, 1 invariant
// violation, 2 config error, 3 runtime stop.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "warplab/config.hpp"
#include "warplab/experiment.hpp"

namespace {

using warplab::ExperimentConfig;
using warplab::ExperimentReport;
using warplab::RunStatus;
using warplab::ojson;

void emit_error(const std::string& kind, const std::string& detail, const std::string& key = "") {
  ojson rec;
  rec["error"] = kind;
  if (!key.empty()) rec["key"] = key;
  rec["detail"] = detail;
  std::cerr << rec.dump() << "\n";
}

int finish(const ExperimentReport& rep) {
  ojson line;
  line["status"] = warplab::to_string(rep.status);
  line["out_dir"] = rep.out_dir.string();
  std::cout << line.dump() << "\n";
  if (rep.status != RunStatus::ok)
    emit_error(warplab::to_string(rep.status),
               rep.summary.value("status", std::string("see summary.json")) + " in " +
                   rep.out_dir.string());
  return static_cast<int>(rep.status);
}

// run a config file whose kind must belong to the subcommand's family
int run_config_file(const std::string& path, const std::string& out,
                    const std::vector<std::string>& allowed_kinds) {
  ExperimentConfig cfg = warplab::load_config(path);
  bool ok = false;
  for (const auto& k : allowed_kinds) ok = ok || (k == cfg.kind);
  if (!ok) {
    std::string names;
    for (const auto& k : allowed_kinds) names += (names.empty() ? "" : " | ") + k;
    throw warplab::ConfigError("kind", "config kind '" + cfg.kind +
                                           "' does not match this subcommand (expected " + names +
                                           ")");
  }
  return finish(warplab::run_experiment(cfg, warplab::resolve_out_dir(cfg, out)));
}

int run_moser(int seeds, long seed, const std::string& out) {
  ojson doc;
  doc["schema_version"] = warplab::config_schema_version;
  doc["kind"] = "moser_verify";
  doc["label"] = "moser_verify";
  doc["seed"] = seed;
  doc["moser"] = ojson{{"seeds", seeds}};
  ExperimentConfig cfg = warplab::parse_config(doc);
  return finish(warplab::run_experiment(cfg, warplab::resolve_out_dir(cfg, out)));
}

int run_report(const std::string& in_dir) {
  ojson digest = warplab::report_digest(in_dir);
  std::cout << digest.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for warped-product curvature flows"};
  app.require_subcommand(1);

  std::string config_path, out_dir, suite_path, in_dir;
  int seeds = 100;
  long seed = 1;

  CLI::App* flow = app.add_subcommand("flow", "curvature flow runs and sweeps");
  CLI::App* flow_run = flow->add_subcommand("run", "integrate a flow config");
  flow_run->add_option("--config", config_path, "experiment config file")->required();
  flow_run->add_option("--out", out_dir, "output directory");

  CLI::App* moser = app.add_subcommand("moser", "integral inequality suites");
  CLI::App* moser_verify = moser->add_subcommand("verify", "run the seeded inequality suite");
  moser_verify->add_option("--seeds", seeds, "number of random probes");
  moser_verify->add_option("--seed", seed, "base RNG seed");
  moser_verify->add_option("--out", out_dir, "output directory");

  CLI::App* sobolev = app.add_subcommand("sobolev", "Sobolev constant estimation");
  CLI::App* sobolev_est = sobolev->add_subcommand("estimate", "maximize the Rayleigh ratio");
  sobolev_est->add_option("--config", config_path, "experiment config file")->required();
  sobolev_est->add_option("--out", out_dir, "output directory");

  CLI::App* scan = app.add_subcommand("scan", "geometric scans over all centers");
  CLI::App* scan_conc = scan->add_subcommand("concentration", "windowed curvature concentration");
  scan_conc->add_option("--config", config_path, "experiment config file")->required();
  scan_conc->add_option("--out", out_dir, "output directory");

  CLI::App* calibrate = app.add_subcommand("calibrate", "measure the suite constants");
  calibrate->add_option("--suite", suite_path, "calibration suite config")->required();
  calibrate->add_option("--out", out_dir, "output directory");

  CLI::App* report = app.add_subcommand("report", "digest a finished run directory");
  report->add_option("--in", in_dir, "run directory to read")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    emit_error("config", e.what());
    return static_cast<int>(RunStatus::config_error);
  }

  try {
    if (flow_run->parsed())
      return run_config_file(config_path, out_dir, {"flow", "collapse_sweep", "smoothing_sweep"});
    if (moser_verify->parsed()) {
      if (seeds < 1) throw warplab::ConfigError("seeds", "must be at least 1");
      if (seed < 0) throw warplab::ConfigError("seed", "must be nonnegative");
      return run_moser(seeds, seed, out_dir);
    }
    if (sobolev_est->parsed()) return run_config_file(config_path, out_dir, {"sobolev"});
    if (scan_conc->parsed()) return run_config_file(config_path, out_dir, {"scan"});
    if (calibrate->parsed()) return run_config_file(suite_path, out_dir, {"calibrate"});
    if (report->parsed()) return run_report(in_dir);
    emit_error("config", "missing subcommand (see --help)");
    return static_cast<int>(RunStatus::config_error);
  } catch (const warplab::ConfigError& e) {
    emit_error("config", e.what(), e.key);
    return static_cast<int>(RunStatus::config_error);
  } catch (const std::invalid_argument& e) {
    emit_error("config", e.what());
    return static_cast<int>(RunStatus::config_error);
  } catch (const std::exception& e) {
    emit_error("runtime", e.what());
    return static_cast<int>(RunStatus::runtime_stop);
  }
}
