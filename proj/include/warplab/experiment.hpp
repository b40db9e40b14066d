#pragma once

// Experiment orchestration.  Each config kind maps to one executor that
// builds its inputs, runs the numerics, and writes a fixed artifact set
// (manifest.json, summary.json, CSV series, SVG plots) under the run's
// output directory and nowhere else.  Writers are deterministic: the same
// config and seed produce identical bytes.  Sweeps fan members out over a
// small worker pool; aggregation is a fold over member indices in order,
// so worker scheduling never changes a result.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "warplab/analysis.hpp"
#include "warplab/config.hpp"
#include "warplab/cutoff.hpp"
#include "warplab/flow.hpp"
#include "warplab/heat.hpp"
#include "warplab/io.hpp"
#include "warplab/moser.hpp"
#include "warplab/rng.hpp"
#include "warplab/smoothing.hpp"
#include "warplab/sobolev.hpp"
#include "warplab/svg.hpp"

namespace warplab {

enum class RunStatus { ok = 0, invariant_violation = 1, config_error = 2, runtime_stop = 3 };

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::ok: return "ok";
    case RunStatus::invariant_violation: return "invariant_violation";
    case RunStatus::config_error: return "config_error";
    case RunStatus::runtime_stop: return "runtime_stop";
  }
  return "unknown";
}

struct ExperimentReport {
  RunStatus status = RunStatus::ok;
  ojson summary;
  std::filesystem::path out_dir;
};

struct HypothesesVerdict {
  bool l2_ok = false;
  bool ric_ok = false;
  bool concentration_ok = false;
  bool pass = false;
  double max_tube_l2 = 0.0;
  int worst_center = 0;
  double sup_ric = 0.0;
  double max_concentration = 0.0;
  double predicted_horizon = 0.0;
};

// scans all centers: tube L^2 curvature against eps, pointwise |Ric| against
// K; the concentration form r^4/Vol * int |Rm|^2 <= eps is recorded as an
// equivalent verdict.  predicted_horizon = c1 * min(r^2, 1/K).
inline HypothesesVerdict check_hypotheses(const WarpedMetric& m, double r, double eps, double K,
                                          double horizon_c1 = 0.1) {
  if (!(r > 0.0) || r > 1.0)
    throw std::invalid_argument("check_hypotheses: radius must lie in (0, 1]");
  if (!(eps > 0.0) || !(K > 0.0))
    throw std::invalid_argument("check_hypotheses: eps and K must be positive");
  CurvatureField c = curvature(m);
  double rho = std::min(r, 0.5 * m.total_arclength() * (1.0 - 1e-9));
  HypothesesVerdict v;
  for (int i = 0; i < m.n(); ++i) {
    Tube t = tube_at(m, i, rho);
    double l2 = l2_curvature(m, c, t);
    if (l2 > v.max_tube_l2) {
      v.max_tube_l2 = l2;
      v.worst_center = i;
    }
    double vol = volume(m, t).value;
    if (vol > 0.0)
      v.max_concentration = std::max(v.max_concentration, std::pow(r, 4.0) / vol * l2);
  }
  v.sup_ric = c.sup_ric();
  v.l2_ok = v.max_tube_l2 <= eps;
  v.ric_ok = v.sup_ric <= K;
  v.concentration_ok = v.max_concentration <= eps;
  v.pass = v.l2_ok && v.ric_ok;
  v.predicted_horizon = horizon_c1 * std::min(r * r, 1.0 / K);
  return v;
}

inline const char* default_out_env = "WARPLAB_OUT";

inline std::filesystem::path resolve_out_dir(const ExperimentConfig& cfg,
                                             const std::string& cli_out) {
  if (!cli_out.empty()) return cli_out;
  if (!cfg.out_dir.empty()) return cfg.out_dir;
  if (const char* root = std::getenv(default_out_env))
    return std::filesystem::path(root) / cfg.label;
  return std::filesystem::path("runs") / cfg.label;
}

namespace exp_detail {

inline FlowControls make_flow_controls(const FlowSpec& fs) {
  FlowControls fc;
  fc.t_end = fs.t_end;
  fc.cfl_safety = fs.cfl_safety;
  fc.max_steps = fs.max_steps;
  fc.equivalence_limit = fs.equivalence_limit;
  fc.fixed_dt = fs.fixed_dt;
  fc.tracker_radius = fs.tracker_radius;
  fc.tracker_cadence = fs.tracker_cadence;
  fc.snapshot_times.push_back(0.01 * fs.t_end);
  for (int k = 1; k < fs.snapshot_count; ++k)
    fc.snapshot_times.push_back(fs.t_end * k / (fs.snapshot_count - 1));
  return fc;
}

inline CsvTable series_table(const BoundReport& rep) {
  CsvTable t;
  t.columns = {"t[len^2]",          "sup_rm[1/len^2]", "sup_ric[1/len^2]",
               "t_sup_rm[1]",       "t23_sup_ric[1/len^(2/3)]",
               "equiv_ratio[1]",    "tube_l2[1]",      "volume[len^4]",
               "concentration[1]"};
  for (const auto& s : rep.series)
    t.add_row({s.t, s.sup_rm, s.sup_ric, s.t_sup_rm, s.t23_sup_ric, s.equiv_ratio, s.tube_l2_max,
               s.volume, s.concentration_max});
  return t;
}

// header names carry units in brackets; match on the base name
inline int column_index(const CsvTable& t, const std::string& base) {
  for (size_t c = 0; c < t.columns.size(); ++c) {
    std::string name = t.columns[c].substr(0, t.columns[c].find('['));
    if (name == base) return static_cast<int>(c);
  }
  return -1;
}

inline PlotSeries extract_series(const CsvTable& t, const std::string& xbase,
                                 const std::string& ybase) {
  PlotSeries s;
  s.label = ybase;
  int xc = column_index(t, xbase), yc = column_index(t, ybase);
  if (xc < 0 || yc < 0) return s;
  for (const auto& row : t.rows) {
    s.x.push_back(row[static_cast<size_t>(xc)]);
    s.y.push_back(row[static_cast<size_t>(yc)]);
  }
  return s;
}

// plots are rebuilt from the CSV on disk, never from in-memory state, so a
// later `report` pass reproduces them bit for bit
inline void standard_plots(const std::filesystem::path& dir, std::vector<std::string>& artifacts) {
  std::filesystem::path csv = dir / "series.csv";
  if (!std::filesystem::exists(csv)) return;
  CsvTable t = read_csv(csv);
  write_svg_plot(dir / "bounds.svg", "tracked bounds",
                 {extract_series(t, "t", "t_sup_rm"), extract_series(t, "t", "equiv_ratio")});
  write_svg_plot(dir / "windows.svg", "windowed curvature",
                 {extract_series(t, "t", "tube_l2"), extract_series(t, "t", "concentration")});
  artifacts.push_back("bounds.svg");
  artifacts.push_back("windows.svg");
}

inline void write_manifest(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                           const std::vector<std::string>& artifacts) {
  ojson man;
  man["schema_version"] = config_schema_version;
  man["kind"] = cfg.kind;
  man["label"] = cfg.label;
  man["fingerprint"] = config_fingerprint(cfg.raw);
  man["artifacts"] = artifacts;
  man["config"] = cfg.raw;
  write_json(dir / "manifest.json", man);
}

inline RunStatus flow_status(StopReason r) {
  switch (r) {
    case StopReason::reached_t_end: return RunStatus::ok;
    case StopReason::equivalence_violated: return RunStatus::ok;  // measured outcome
    case StopReason::step_limit: return RunStatus::runtime_stop;
    case StopReason::nonfinite_state: return RunStatus::runtime_stop;
  }
  return RunStatus::runtime_stop;
}

inline ojson flow_summary(const ExperimentConfig& cfg, const WarpedMetric& final_state,
                          const FlowResult& res) {
  const BoundReport& rep = res.report;
  ojson s;
  s["kind"] = cfg.kind;
  s["label"] = cfg.label;
  s["status"] = to_string(flow_status(rep.stop_reason));
  s["stop_reason"] = to_string(rep.stop_reason);
  s["reached_t_end"] = rep.stop_reason == StopReason::reached_t_end;
  s["steps"] = rep.steps;
  s["t_final"] = rep.t_final;
  s["t1"] = rep.t1;
  s["max_t_sup_rm"] = rep.max_t_sup_rm;
  s["max_t23_sup_ric"] = rep.max_t23_sup_ric;
  s["max_equiv_ratio"] = rep.max_equiv_ratio;
  double b_lo = final_state.b[0], b_hi = final_state.b[0];
  for (double b : final_state.b) {
    b_lo = std::min(b_lo, b);
    b_hi = std::max(b_hi, b);
  }
  s["b_sq_final_min"] = b_lo * b_lo;
  s["b_sq_final_max"] = b_hi * b_hi;
  s["volume_final"] = volume(final_state);
  s["sup_rm_final"] = curvature(final_state).sup_rm();
  if (res.trajectory.snapshots.size() >= 3)
    s["dvol_residual"] = dvol_residual(res.trajectory);
  return s;
}

struct FlowRunOutput {
  FlowResult result;
  WarpedMetric final_state;
  ojson summary;
  RunStatus status = RunStatus::ok;
};

inline FlowRunOutput execute_flow(const ExperimentConfig& cfg, const WarpedMetric& g0,
                                  const std::filesystem::path& dir,
                                  std::vector<std::string>& artifacts) {
  FlowRunOutput out;
  out.result = run_flow(g0, make_flow_controls(cfg.flow));
  out.final_state = out.result.trajectory.snapshots.back();
  out.status = flow_status(out.result.report.stop_reason);
  out.summary = flow_summary(cfg, out.final_state, out.result);
  write_csv(dir / "series.csv", series_table(out.result.report));
  artifacts.push_back("series.csv");
  standard_plots(dir, artifacts);
  write_json(dir / "summary.json", out.summary);
  artifacts.push_back("summary.json");
  return out;
}

inline ExperimentReport run_flow_experiment(const ExperimentConfig& cfg,
                                            const std::filesystem::path& dir) {
  Grid g = Grid::make(cfg.grid.n, cfg.grid.length);
  WarpedMetric m0 = build_metric(cfg.profile, g);
  std::vector<std::string> artifacts;
  FlowRunOutput run = execute_flow(cfg, m0, dir, artifacts);
  write_manifest(dir, cfg, artifacts);
  return {run.status, run.summary, dir};
}

// ---- moser_verify ---------------------------------------------------------

inline ExperimentReport run_moser_experiment(const ExperimentConfig& cfg,
                                             const std::filesystem::path& dir) {
  Grid g = Grid::make(cfg.grid.n, cfg.grid.length);
  const double rel_tol = tolerance_or(cfg, "moser_rel_tol", 1e-8);

  CsvTable checks;
  checks.columns = {"check[0=gap;1=window;2=budget]", "seed[1]", "p[1]", "margin[rel]"};

  long gap_checks = 0, gap_violations = 0;
  double min_gap = std::numeric_limits<double>::infinity();
  for (int s = 0; s < cfg.moser.seeds; ++s) {
    Rng rng(substream(cfg.seed, static_cast<uint64_t>(s)));
    WarpedMetric m = random_mild_metric(g, rng);
    std::vector<double> f = random_smooth_field(g, rng, {0.5, 2.0, 3}).values;
    int center = rng.uniform_int(0, g.n - 1);
    double r_outer = std::min(cfg.tube.radius, 0.45 * m.total_arclength());
    std::vector<double> chi = radial_cutoff(m, center, r_outer, 0.5 * r_outer).values;
    for (double p : cfg.moser.p_values) {
      Lemma1Result res = lemma1_gap(m, f, chi, p);
      double scale = std::max(std::abs(res.lhs), std::abs(res.rhs));
      double rel = scale > 0.0 ? res.gap / scale : 0.0;
      ++gap_checks;
      if (rel < -rel_tol) ++gap_violations;
      min_gap = std::min(min_gap, rel);
      checks.add_row({0.0, static_cast<double>(s), p, rel});
    }
  }

  // windowed space-time recursion on a smaller heat suite
  long window_checks = 0, window_violations = 0;
  double min_window = std::numeric_limits<double>::infinity();
  int probes = std::max(1, cfg.moser.seeds / 10);
  for (int s = 0; s < probes; ++s) {
    Rng rng(substream(cfg.seed ^ 0x5eedULL, static_cast<uint64_t>(s)));
    WarpedMetric m = random_mild_metric(g, rng);
    int center = rng.uniform_int(0, g.n - 1);
    double r = std::min(cfg.tube.radius, 0.4 * m.total_arclength());
    double T = 0.05;

    HeatProblem hp;
    hp.metric = m;
    hp.f0 = random_smooth_field(g, rng, {0.5, 2.0, 3}).values;
    hp.u = random_smooth_field(g, rng, {0.0, 1.0, 2}).values;
    hp.horizon = T;
    hp.mu = 1.25 * lp_norm(m, hp.u, 3.0) * std::cbrt(T);
    Tube tube = tube_at(m, center, r);
    SobolevControls sctl;
    sctl.seed = substream(cfg.seed, 7777 + static_cast<uint64_t>(s));
    hp.sobolev_A = 1.05 * sobolev_estimate(m, tube, sctl).A;
    HeatSeries series = heat_solve(hp);

    for (double p : {1.5, 2.0}) {
      Lemma4Result res = lemma4_check(m, series, p, 0.25 * T, 0.5 * T, r, 0.5 * r,
                                      hp.sobolev_A, hp.mu, center);
      double scale = std::max(std::abs(res.lhs), std::abs(res.rhs));
      double rel = scale > 0.0 ? res.margin / scale : 0.0;
      ++window_checks;
      if (rel < -rel_tol) ++window_violations;
      min_window = std::min(min_window, rel);
      checks.add_row({1.0, static_cast<double>(s), p, rel});
    }
  }

  // adversarial probe: a potential 1000x over its declared budget must be
  // reported, not absorbed
  bool adversarial_detected = true;
  if (cfg.moser.adversarial) {
    Rng rng(substream(cfg.seed ^ 0xbadULL, 0));
    WarpedMetric m = random_mild_metric(g, rng);
    HeatProblem hp;
    hp.metric = m;
    hp.f0 = random_smooth_field(g, rng, {0.5, 2.0, 3}).values;
    hp.u = random_smooth_field(g, rng, {0.5, 1.5, 2}).values;
    hp.horizon = 0.05;
    hp.mu = lp_norm(m, hp.u, 3.0) * std::cbrt(hp.horizon) / 1000.0;
    HeatSeries series = heat_solve(hp);
    adversarial_detected = !series.budget_ok;
    checks.add_row({2.0, 0.0, 0.0, adversarial_detected ? 1.0 : 0.0});
  }

  write_csv(dir / "checks.csv", checks);

  bool ok = gap_violations == 0 && window_violations == 0 && adversarial_detected;
  ojson s;
  s["kind"] = cfg.kind;
  s["label"] = cfg.label;
  s["status"] = to_string(ok ? RunStatus::ok : RunStatus::invariant_violation);
  s["seeds"] = cfg.moser.seeds;
  s["p_values"] = cfg.moser.p_values;
  s["gap_checks"] = gap_checks;
  s["gap_violations"] = gap_violations;
  s["gap_min_rel"] = min_gap;
  s["window_checks"] = window_checks;
  s["window_violations"] = window_violations;
  s["window_min_rel_margin"] = min_window;
  s["adversarial_detected"] = adversarial_detected;
  write_json(dir / "summary.json", s);
  write_manifest(dir, cfg, {"checks.csv", "summary.json"});
  return {ok ? RunStatus::ok : RunStatus::invariant_violation, s, dir};
}

// ---- sobolev ---------------------------------------------------------------

inline ExperimentReport run_sobolev_experiment(const ExperimentConfig& cfg,
                                               const std::filesystem::path& dir) {
  Grid g = Grid::make(cfg.grid.n, cfg.grid.length);
  WarpedMetric m = build_metric(cfg.profile, g);
  int center = m.grid.wrap(static_cast<int>(std::lround(cfg.tube.center_frac * g.n)));
  double rho = std::min(cfg.tube.radius, 0.45 * m.total_arclength());
  Tube tube = tube_at(m, center, rho);

  SobolevControls ctl;
  ctl.restarts = cfg.sobolev_restarts;
  ctl.seed = cfg.seed;
  SobolevEstimate est = sobolev_estimate(m, tube, ctl);

  std::vector<double> mu = node_measure(m);
  double self_check = sobolev_detail::rayleigh_ratio(m, mu, est.maximizer);
  double self_err = std::abs(self_check - est.A) / est.A;
  bool consistent = self_err <= tolerance_or(cfg, "sobolev_self_tol", 1e-10);

  double vol = volume(m, tube).value;
  double proxy = std::sqrt(std::pow(rho, 4.0) / vol);

  CsvTable prof;
  prof.columns = {"node[1]", "s[len]", "f[1]"};
  for (int i = 0; i < g.n; ++i)
    prof.add_row({static_cast<double>(i), g.coord(i), est.maximizer[static_cast<size_t>(i)]});
  write_csv(dir / "maximizer.csv", prof);

  ojson s;
  s["kind"] = cfg.kind;
  s["label"] = cfg.label;
  s["status"] = to_string(consistent ? RunStatus::ok : RunStatus::invariant_violation);
  s["A"] = est.A;
  s["converged"] = est.converged;
  s["iterations"] = est.iterations;
  s["restart_spread"] = est.restart_spread;
  s["restart_values"] = est.restart_values;
  s["self_check_rel_err"] = self_err;
  s["tube_center"] = center;
  s["tube_radius"] = rho;
  s["tube_volume"] = vol;
  s["volume_proxy"] = proxy;
  s["ratio_vs_proxy"] = est.A / proxy;
  write_json(dir / "summary.json", s);
  write_manifest(dir, cfg, {"maximizer.csv", "summary.json"});
  return {consistent ? RunStatus::ok : RunStatus::invariant_violation, s, dir};
}

// ---- scan ------------------------------------------------------------------

inline ExperimentReport run_scan_experiment(const ExperimentConfig& cfg,
                                            const std::filesystem::path& dir) {
  Grid g = Grid::make(cfg.grid.n, cfg.grid.length);
  WarpedMetric m = build_metric(cfg.profile, g);
  double r = cfg.scan_radius;
  ConcentrationScan scan = concentration_scan(m, r);

  CsvTable t;
  t.columns = {"center[1]", "s[len]", "ratio_r[1]", "ratio_r2[1]", "ratio_r4[1]",
               "volume_r[len^4]", "l2_r[1]"};
  for (int i = 0; i < g.n; ++i) {
    const auto& r0 = scan.records[0][static_cast<size_t>(i)];
    const auto& r1 = scan.records[1][static_cast<size_t>(i)];
    const auto& r2 = scan.records[2][static_cast<size_t>(i)];
    t.add_row({static_cast<double>(i), g.coord(i), r0.ratio, r1.ratio, r2.ratio, r0.volume,
               r0.l2_curv});
  }
  write_csv(dir / "concentration.csv", t);

  // covering with brute-force coverage verification
  bool coverage_ok = true;
  int covering_n = 0;
  double half = 0.5 * m.total_arclength();
  CurvatureField c = curvature(m);
  double sup_rm = c.sup_rm();
  int cover_center = 0;
  for (int i = 1; i < g.n; ++i)
    if (c.riem_norm_sq[i] > c.riem_norm_sq[cover_center]) cover_center = i;
  double cover_r = std::min(r, 0.49 * half);
  Covering cov = covering(m, cover_center, cover_r);
  covering_n = cov.count;
  Tube big = tube_at(m, cover_center, 2.0 * cover_r);
  for (int k = 0; k < big.count; ++k) {
    int node = m.grid.wrap(big.first + k);
    double best = std::numeric_limits<double>::infinity();
    for (int cen : cov.centers) best = std::min(best, arc_distance(m, cen, node));
    if (best > cover_r * (1.0 + 1e-12)) coverage_ok = false;
  }

  Comparability comp = ball_comparability(m, cover_r);

  double eps = tolerance_or(cfg, "epsilon", 1.0);
  double K = tolerance_or(cfg, "ric_bound", 3.0);
  HypothesesVerdict verdict = check_hypotheses(m, std::min(r, 1.0), eps, K,
                                               tolerance_or(cfg, "horizon_c1", 0.1));

  ojson s;
  s["kind"] = cfg.kind;
  s["label"] = cfg.label;
  s["status"] = to_string(coverage_ok ? RunStatus::ok : RunStatus::invariant_violation);
  s["radius"] = r;
  s["max_ratio"] = scan.max_ratio;
  s["argmax_center"] = scan.argmax_center;
  s["sup_rm"] = sup_rm;
  s["covering_n"] = covering_n;
  s["covering_centers"] = cov.centers;
  s["coverage_ok"] = coverage_ok;
  s["comparability_max_ratio"] = comp.max_ratio;
  s["hypotheses"] = ojson{{"epsilon", eps},
                          {"ric_bound", K},
                          {"l2_ok", verdict.l2_ok},
                          {"ric_ok", verdict.ric_ok},
                          {"concentration_ok", verdict.concentration_ok},
                          {"pass", verdict.pass},
                          {"max_tube_l2", verdict.max_tube_l2},
                          {"worst_center", verdict.worst_center},
                          {"sup_ric", verdict.sup_ric},
                          {"max_concentration", verdict.max_concentration},
                          {"predicted_horizon", verdict.predicted_horizon}};
  write_json(dir / "summary.json", s);
  write_manifest(dir, cfg, {"concentration.csv", "summary.json"});
  return {coverage_ok ? RunStatus::ok : RunStatus::invariant_violation, s, dir};
}

// ---- sweeps ----------------------------------------------------------------

// run `count` member jobs over at most `workers` threads; exceptions are
// rethrown in member order so failures are deterministic too
template <typename Job>
inline void run_members(int count, int workers, Job job) {
  if (workers <= 1 || count <= 1) {
    for (int k = 0; k < count; ++k) job(k);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<size_t>(count));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      int k = next.fetch_add(1);
      if (k >= count) return;
      try {
        job(k);
      } catch (...) {
        errors[static_cast<size_t>(k)] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  int spawn = std::min(workers, count);
  pool.reserve(static_cast<size_t>(spawn));
  for (int i = 0; i < spawn; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline std::string member_dir_name(int k) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "member_%02d", k);
  return buf;
}

inline ExperimentReport run_collapse_sweep(const ExperimentConfig& cfg,
                                           const std::filesystem::path& dir) {
  Grid g = Grid::make(cfg.grid.n, cfg.grid.length);
  WarpedMetric base = build_metric(cfg.profile, g);
  if (cfg.sweep.family == "seeded") {
    Rng rng(cfg.seed);
    std::vector<double> mod = random_smooth_field(g, rng, {0.9, 1.1, 2}).values;
    for (int i = 0; i < g.n; ++i) base.a[i] *= mod[static_cast<size_t>(i)];
  }

  const auto& factors = cfg.sweep.collapse_factors;
  int count = static_cast<int>(factors.size());
  std::vector<FlowRunOutput> runs(static_cast<size_t>(count));
  std::vector<std::string> artifacts;

  run_members(count, cfg.sweep.workers, [&](int k) {
    WarpedMetric m0 = base;
    for (double& a : m0.a) a *= factors[static_cast<size_t>(k)];
    std::filesystem::path mdir = dir / member_dir_name(k);
    std::filesystem::create_directories(mdir);
    ExperimentConfig mcfg = cfg;
    mcfg.label = cfg.label + "/" + member_dir_name(k);
    std::vector<std::string> marts;
    runs[static_cast<size_t>(k)] = execute_flow(mcfg, m0, mdir, marts);
  });

  CsvTable agg;
  agg.columns = {"factor[1]",      "t_final[len^2]",  "steps[1]",
                 "max_t_sup_rm[1]", "max_t23_sup_ric[1/len^(2/3)]",
                 "max_equiv[1]",   "volume_final[len^4]", "stop_code[1]"};
  double t_lo = std::numeric_limits<double>::infinity(), t_hi = 0.0;
  double tr_lo = std::numeric_limits<double>::infinity(), tr_hi = 0.0;
  double eq_lo = std::numeric_limits<double>::infinity(), eq_hi = 0.0;
  for (int k = 0; k < count; ++k) {
    const auto& rep = runs[static_cast<size_t>(k)].result.report;
    agg.add_row({factors[static_cast<size_t>(k)], rep.t_final, static_cast<double>(rep.steps),
                 rep.max_t_sup_rm, rep.max_t23_sup_ric, rep.max_equiv_ratio,
                 volume(runs[static_cast<size_t>(k)].final_state),
                 static_cast<double>(rep.stop_reason)});
    t_lo = std::min(t_lo, rep.t_final);
    t_hi = std::max(t_hi, rep.t_final);
    tr_lo = std::min(tr_lo, rep.max_t_sup_rm);
    tr_hi = std::max(tr_hi, rep.max_t_sup_rm);
    eq_lo = std::min(eq_lo, rep.max_equiv_ratio);
    eq_hi = std::max(eq_hi, rep.max_equiv_ratio);
  }
  write_csv(dir / "aggregate.csv", agg);
  artifacts.push_back("aggregate.csv");

  double t_spread = t_lo > 0.0 ? t_hi / t_lo - 1.0 : 0.0;
  double tracker_spread = tr_lo > 0.0 ? tr_hi / tr_lo - 1.0 : tr_hi - tr_lo;
  double equiv_spread = eq_lo > 0.0 ? eq_hi / eq_lo - 1.0 : 0.0;
  double t_tol = tolerance_or(cfg, "t_final_spread",
                              cfg.sweep.family == "constant" ? 1e-12 : 0.10);
  double tr_tol = tolerance_or(cfg, "tracker_spread",
                               cfg.sweep.family == "constant" ? 1e-12 : 0.25);
  bool within = t_spread <= t_tol && tracker_spread <= tr_tol;

  // members may stop at their own existence time; a sweep fails only on
  // inconsistency between members
  RunStatus status = within ? RunStatus::ok : RunStatus::invariant_violation;

  ojson s;
  s["kind"] = cfg.kind;
  s["label"] = cfg.label;
  s["status"] = to_string(status);
  s["family"] = cfg.sweep.family;
  s["factors"] = factors;
  ojson members = ojson::array();
  for (int k = 0; k < count; ++k) members.push_back(runs[static_cast<size_t>(k)].summary);
  s["members"] = members;
  s["t_final_spread"] = t_spread;
  s["tracker_spread"] = tracker_spread;
  s["equiv_spread"] = equiv_spread;
  s["within_tolerance"] = within;
  write_json(dir / "summary.json", s);
  artifacts.push_back("summary.json");
  write_manifest(dir, cfg, artifacts);
  return {status, s, dir};
}

// bump depth solving: pick the profile height parameter so the tube L^2
// curvature at the bump hits the target (monotone in the parameter)
inline BumpProfile solve_bump_l2(const Grid& g, double width, double l2_target, double radius) {
  BumpProfile p;
  p.center = 0.5 * g.length;
  p.width = width;
  double q_hi = 0.95 / (width * width);
  double q_lo = 1e-9;
  auto tube_l2_of = [&](double q) {
    BumpProfile trial = p;
    trial.height = q;
    WarpedMetric m = build_metric(trial, g);
    int center = g.n / 2;
    double rho = std::min(radius, 0.45 * m.total_arclength());
    return l2_curvature(m, curvature(m), tube_at(m, center, rho));
  };
  double base = tube_l2_of(q_lo);
  if (base > l2_target)
    throw std::invalid_argument("solve_bump_l2: target below the flat background value");
  if (tube_l2_of(q_hi) < l2_target)
    throw std::invalid_argument("solve_bump_l2: target unreachable before b pinches");
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (q_lo + q_hi);
    if (tube_l2_of(mid) < l2_target)
      q_lo = mid;
    else
      q_hi = mid;
  }
  p.height = 0.5 * (q_lo + q_hi);
  return p;
}

inline ExperimentReport run_smoothing_sweep(const ExperimentConfig& cfg,
                                            const std::filesystem::path& dir) {
  Grid g = Grid::make(cfg.grid.n, cfg.grid.length);
  const auto& heights = cfg.sweep.heights;
  int count = static_cast<int>(heights.size());
  std::vector<FlowRunOutput> runs(static_cast<size_t>(count));
  std::vector<double> lambdas(static_cast<size_t>(count), 1.0);
  std::vector<double> widths(static_cast<size_t>(count), cfg.sweep.width);

  run_members(count, cfg.sweep.workers, [&](int k) {
    Rng jrng(substream(cfg.seed, static_cast<uint64_t>(k)));
    double width = cfg.sweep.width * (1.0 + cfg.sweep.width_jitter * jrng.uniform(-1.0, 1.0));
    widths[static_cast<size_t>(k)] = width;
    BumpProfile prof = solve_bump_l2(g, width, cfg.sweep.l2_target, cfg.sweep.radius);
    WarpedMetric base = build_metric(prof, g);
    double s_base = curvature(base).sup_rm();
    double lambda = std::sqrt(s_base / heights[static_cast<size_t>(k)]);
    lambdas[static_cast<size_t>(k)] = lambda;
    WarpedMetric m0 = rescale_metric(base, lambda);

    ExperimentConfig mcfg = cfg;
    mcfg.label = cfg.label + "/" + member_dir_name(k);
    mcfg.flow.t_end = cfg.sweep.t_end * lambda * lambda;
    mcfg.flow.tracker_radius = cfg.sweep.radius * lambda;
    std::filesystem::path mdir = dir / member_dir_name(k);
    std::filesystem::create_directories(mdir);
    std::vector<std::string> marts;
    runs[static_cast<size_t>(k)] = execute_flow(mcfg, m0, mdir, marts);
  });

  CsvTable agg;
  agg.columns = {"height[1/len^2]", "lambda[1]",        "width[len]",
                 "t_end[len^2]",    "max_t_sup_rm[1]", "stop_code[1]"};
  double v_lo = std::numeric_limits<double>::infinity(), v_hi = 0.0;
  bool all_finished = true;
  for (int k = 0; k < count; ++k) {
    const auto& rep = runs[static_cast<size_t>(k)].result.report;
    double lambda = lambdas[static_cast<size_t>(k)];
    agg.add_row({heights[static_cast<size_t>(k)], lambda, widths[static_cast<size_t>(k)],
                 cfg.sweep.t_end * lambda * lambda, rep.max_t_sup_rm,
                 static_cast<double>(rep.stop_reason)});
    v_lo = std::min(v_lo, rep.max_t_sup_rm);
    v_hi = std::max(v_hi, rep.max_t_sup_rm);
    all_finished = all_finished && rep.stop_reason == StopReason::reached_t_end;
  }
  write_csv(dir / "aggregate.csv", agg);

  double spread = v_lo > 0.0 ? v_hi / v_lo : std::numeric_limits<double>::infinity();
  double spread_tol = tolerance_or(cfg, "smoothing_spread", 2.0);
  RunStatus status = !all_finished ? RunStatus::runtime_stop
                     : (spread < spread_tol ? RunStatus::ok : RunStatus::invariant_violation);

  ojson s;
  s["kind"] = cfg.kind;
  s["label"] = cfg.label;
  s["status"] = to_string(status);
  s["heights"] = heights;
  s["lambdas"] = lambdas;
  s["widths"] = widths;
  s["l2_target"] = cfg.sweep.l2_target;
  ojson members = ojson::array();
  for (int k = 0; k < count; ++k) members.push_back(runs[static_cast<size_t>(k)].summary);
  s["members"] = members;
  s["t_sup_rm_values"] = [&] {
    std::vector<double> v;
    for (int k = 0; k < count; ++k)
      v.push_back(runs[static_cast<size_t>(k)].result.report.max_t_sup_rm);
    return v;
  }();
  s["spread_factor"] = spread;
  s["all_finished"] = all_finished;
  write_json(dir / "summary.json", s);
  write_manifest(dir, cfg, {"aggregate.csv", "summary.json"});
  return {status, s, dir};
}

// ---- calibrate -------------------------------------------------------------

struct MemberConstants {
  double smoothing = 0.0;     // sup over window of t * sup|Rm|
  double ricci_decay = 0.0;   // sup over window of t^(2/3) * sup|Ric|
  double best_c = 0.0;        // sup of (-R)/|Rm| over the trajectory
  double kernel_cstar = 0.0;  // sup f / kernel over the heat probe
  double sobolev_ratio = 0.0; // A / (r^4/Vol)^(1/2) on the initial metric
  int covering_n = 0;
};

inline MemberConstants measure_member_constants(const ExperimentConfig& mcfg,
                                                const WarpedMetric& m0,
                                                const FlowRunOutput& run, uint64_t seed) {
  MemberConstants mc;
  mc.smoothing = run.result.report.max_t_sup_rm;
  mc.ricci_decay = run.result.report.max_t23_sup_ric;

  for (const auto& snap : run.result.trajectory.snapshots) {
    CurvatureField c = curvature(snap);
    for (int i = 0; i < snap.n(); ++i) {
      double rm = std::sqrt(c.riem_norm_sq[i]);
      if (rm > 1e-14) mc.best_c = std::max(mc.best_c, std::max(0.0, -c.scalar[i]) / rm);
    }
  }

  CurvatureField c0 = curvature(m0);
  int center = 0;
  for (int i = 1; i < m0.n(); ++i)
    if (c0.riem_norm_sq[i] > c0.riem_norm_sq[center]) center = i;
  double half = 0.5 * m0.total_arclength();
  double r = std::min(mcfg.flow.tracker_radius, 0.45 * half);

  mc.covering_n = covering(m0, center, std::min(r, 0.49 * half)).count;

  Tube tube = tube_at(m0, center, r);
  SobolevControls sctl;
  sctl.restarts = mcfg.sobolev_restarts;
  sctl.seed = substream(seed, 101);
  SobolevEstimate est = sobolev_estimate(m0, tube, sctl);
  double vol = volume(m0, tube).value;
  mc.sobolev_ratio = est.A / std::sqrt(std::pow(r, 4.0) / vol);

  // heat probe on the initial metric: the sup bound kernel against the
  // measured running sup, over the upper part of the horizon
  Rng rng(substream(seed, 202));
  HeatProblem hp;
  hp.metric = m0;
  hp.f0 = random_smooth_field(m0.grid, rng, {0.5, 2.0, 3}).values;
  hp.u = random_smooth_field(m0.grid, rng, {0.0, 1.0, 2}).values;
  hp.horizon = mcfg.flow.t_end;
  hp.mu = 1.25 * lp_norm(m0, hp.u, 3.0) * std::cbrt(hp.horizon);
  hp.sobolev_A = 1.05 * est.A;
  HeatSeries series = heat_solve(hp);

  const double p0 = 2.0;
  double energy = h_functional(m0, series, p0, 0.0, tube);
  Tube inner = tube_at(m0, center, 0.5 * r);
  std::vector<double> inner_sup(series.times.size(), 0.0);
  for (size_t k = 0; k < series.times.size(); ++k) {
    double worst = 0.0;
    for (int j = 0; j < inner.count; ++j) {
      int node = m0.grid.wrap(inner.first + j);
      worst = std::max(worst, series.frames[k][static_cast<size_t>(node)]);
    }
    inner_sup[k] = worst;
  }
  for (size_t k = series.times.size(); k-- > 1;)
    inner_sup[k - 1] = std::max(inner_sup[k - 1], inner_sup[k]);
  for (size_t k = 0; k < series.times.size(); ++k) {
    double t = series.times[k];
    if (t < 0.1 * hp.horizon) continue;
    double kernel = sup_bound_kernel(hp.sobolev_A, hp.mu, p0, t, r, energy);
    if (kernel > 0.0) mc.kernel_cstar = std::max(mc.kernel_cstar, inner_sup[k] / kernel);
  }
  return mc;
}

inline double drift(double old_v, double new_v) {
  return std::abs(new_v - old_v) / std::max(std::abs(old_v), 1e-12);
}

inline ExperimentReport run_calibrate(const ExperimentConfig& cfg,
                                      const std::filesystem::path& dir) {
  int count = static_cast<int>(cfg.calibrate.members.size());
  std::vector<ExperimentConfig> members(static_cast<size_t>(count));
  for (int k = 0; k < count; ++k) {
    members[static_cast<size_t>(k)] = parse_config(cfg.calibrate.members[static_cast<size_t>(k)]);
    if (members[static_cast<size_t>(k)].kind != "flow")
      throw ConfigError("calibrate.members[" + std::to_string(k) + "].kind",
                        "calibration members must be flow configs");
  }

  std::vector<FlowRunOutput> runs(static_cast<size_t>(count));
  std::vector<MemberConstants> consts(static_cast<size_t>(count));
  run_members(count, cfg.sweep.workers, [&](int k) {
    const ExperimentConfig& mcfg = members[static_cast<size_t>(k)];
    Grid g = Grid::make(mcfg.grid.n, mcfg.grid.length);
    WarpedMetric m0 = build_metric(mcfg.profile, g);
    std::filesystem::path mdir = dir / member_dir_name(k);
    std::filesystem::create_directories(mdir);
    std::vector<std::string> marts;
    runs[static_cast<size_t>(k)] = execute_flow(mcfg, m0, mdir, marts);
    if (runs[static_cast<size_t>(k)].status == RunStatus::runtime_stop)
      throw std::runtime_error("calibrate: member " + std::to_string(k) + " stopped: " +
                               to_string(runs[static_cast<size_t>(k)].result.report.stop_reason));
    consts[static_cast<size_t>(k)] =
        measure_member_constants(mcfg, m0, runs[static_cast<size_t>(k)],
                                 substream(cfg.seed, static_cast<uint64_t>(k)));
  });

  CsvTable agg;
  agg.columns = {"member[1]",      "smoothing[1]",     "ricci_decay[1/len^(2/3)]",
                 "kernel_cstar[1]", "sobolev_ratio[1]", "covering_n[1]",
                 "best_c[1]"};
  MemberConstants sup;
  for (int k = 0; k < count; ++k) {
    const auto& mc = consts[static_cast<size_t>(k)];
    agg.add_row({static_cast<double>(k), mc.smoothing, mc.ricci_decay, mc.kernel_cstar,
                 mc.sobolev_ratio, static_cast<double>(mc.covering_n), mc.best_c});
    sup.smoothing = std::max(sup.smoothing, mc.smoothing);
    sup.ricci_decay = std::max(sup.ricci_decay, mc.ricci_decay);
    sup.kernel_cstar = std::max(sup.kernel_cstar, mc.kernel_cstar);
    sup.sobolev_ratio = std::max(sup.sobolev_ratio, mc.sobolev_ratio);
    sup.covering_n = std::max(sup.covering_n, mc.covering_n);
    sup.best_c = std::max(sup.best_c, mc.best_c);
  }
  write_csv(dir / "aggregate.csv", agg);

  ojson constants;
  constants["smoothing_constant"] = sup.smoothing;
  constants["ricci_decay_constant"] = sup.ricci_decay;
  constants["kernel_cstar"] = sup.kernel_cstar;
  constants["sobolev_ratio_bound"] = sup.sobolev_ratio;
  constants["covering_n"] = sup.covering_n;
  constants["best_c"] = sup.best_c;

  ojson baseline;
  baseline["schema_version"] = config_schema_version;
  baseline["fingerprint"] = config_fingerprint(cfg.raw);
  baseline["constants"] = constants;
  ojson fps = ojson::array();
  for (int k = 0; k < count; ++k)
    fps.push_back(config_fingerprint(cfg.calibrate.members[static_cast<size_t>(k)]));
  baseline["member_fingerprints"] = fps;
  write_json(dir / "baseline.json", baseline);

  RunStatus status = RunStatus::ok;
  ojson drift_report = ojson::object();
  if (!cfg.calibrate.baseline.empty()) {
    ojson prev = read_json(cfg.calibrate.baseline);
    const ojson& pc = prev.at("constants");
    for (auto it = constants.begin(); it != constants.end(); ++it) {
      double old_v = pc.value(it.key(), 0.0);
      double d = drift(old_v, it.value().get<double>());
      drift_report[it.key()] = d;
      if (d > cfg.calibrate.drift_tol) status = RunStatus::invariant_violation;
    }
  }

  ojson s;
  s["kind"] = cfg.kind;
  s["label"] = cfg.label;
  s["status"] = to_string(status);
  s["members"] = count;
  s["constants"] = constants;
  s["drift_tol"] = cfg.calibrate.drift_tol;
  s["drift"] = drift_report;
  s["compared_against"] = cfg.calibrate.baseline;
  write_json(dir / "summary.json", s);
  write_manifest(dir, cfg, {"aggregate.csv", "baseline.json", "summary.json"});
  return {status, s, dir};
}

}  // namespace exp_detail

inline ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                       const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  using namespace exp_detail;
  if (cfg.kind == "flow") return run_flow_experiment(cfg, out_dir);
  if (cfg.kind == "moser_verify") return run_moser_experiment(cfg, out_dir);
  if (cfg.kind == "sobolev") return run_sobolev_experiment(cfg, out_dir);
  if (cfg.kind == "scan") return run_scan_experiment(cfg, out_dir);
  if (cfg.kind == "collapse_sweep") return run_collapse_sweep(cfg, out_dir);
  if (cfg.kind == "smoothing_sweep") return run_smoothing_sweep(cfg, out_dir);
  if (cfg.kind == "calibrate") return run_calibrate(cfg, out_dir);
  throw ConfigError("kind", "unknown experiment kind '" + cfg.kind + "'");
}

// digest of a finished run directory; regenerates the SVG plots from the CSV
// on disk, proving the plots are reproducible post hoc
inline ojson report_digest(const std::filesystem::path& dir, bool regen_plots = true) {
  ojson man = read_json(dir / "manifest.json");
  ojson digest;
  digest["label"] = man.value("label", "");
  digest["kind"] = man.value("kind", "");
  digest["fingerprint"] = man.value("fingerprint", "");
  if (std::filesystem::exists(dir / "summary.json"))
    digest["summary"] = read_json(dir / "summary.json");
  if (regen_plots) {
    std::vector<std::string> arts;
    exp_detail::standard_plots(dir, arts);
    digest["plots_regenerated"] = arts;
  }
  return digest;
}

}  // namespace warplab
