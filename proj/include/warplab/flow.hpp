#pragma once

// Ricci flow  dg/dt = -2 Ric(g)  restricted to the warped ansatz.  In the
// warps the flow closes up as
//
//   dw/dt = w (a''/a + 2 b''/b)
//   da/dt = a'' + 2 a'b'/b
//   db/dt = b'' + a'b'/a - (1 - b'^2)/b
//
// which is -warp * (Ricci eigenvalue) componentwise; the test suite checks
// that identity against curvature() to machine precision.  Time stepping is
// explicit midpoint under the diffusive CFL with a curvature cap, with step
// rejection on positivity loss (no retry below dt_min: a rejected minimal
// step stops the run and is reported, never papered over).

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "warplab/curvature.hpp"
#include "warplab/tube.hpp"

namespace warplab {

struct FlowRhs {
  std::vector<double> dw, da, db;
};

inline FlowRhs flow_rhs(const WarpedMetric& m) {
  int n = m.n();
  std::vector<double> a1 = deriv1_arc(m, m.a), b1 = deriv1_arc(m, m.b);
  std::vector<double> a2 = deriv2_arc(m, m.a), b2 = deriv2_arc(m, m.b);
  FlowRhs r;
  r.dw.resize(static_cast<size_t>(n));
  r.da.resize(static_cast<size_t>(n));
  r.db.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    r.dw[i] = m.w[i] * (a2[i] / m.a[i] + 2.0 * b2[i] / m.b[i]);
    r.da[i] = a2[i] + 2.0 * a1[i] * b1[i] / m.b[i];
    r.db[i] = b2[i] + a1[i] * b1[i] / m.a[i] - (1.0 - b1[i] * b1[i]) / m.b[i];
  }
  return r;
}

inline double cfl_dt(const WarpedMetric& m, double safety) {
  if (!(safety > 0.0)) throw std::invalid_argument("cfl_dt: safety must be positive");
  double ds = m.ds();
  double diffusive = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m.n(); ++i) {
    double h = m.w[i] * ds;
    diffusive = std::min(diffusive, h * h / 4.0);
  }
  double cap = 1.0 / (1.0 + curvature(m).sup_rm());
  return safety * std::min(diffusive, cap);
}

struct StepResult {
  WarpedMetric metric;
  bool accepted = false;
  int bad_index = -1;  // first index that lost positivity/finiteness, if rejected
};

namespace detail {
inline int apply_update(WarpedMetric& out, const WarpedMetric& base, const FlowRhs& r,
                        double dt) {
  int n = base.n();
  for (int i = 0; i < n; ++i) {
    out.w[i] = base.w[i] + dt * r.dw[i];
    out.a[i] = base.a[i] + dt * r.da[i];
    out.b[i] = base.b[i] + dt * r.db[i];
  }
  for (int i = 0; i < n; ++i) {
    for (double v : {out.w[i], out.a[i], out.b[i]})
      if (!(v > 0.0) || !std::isfinite(v)) return i;
  }
  return -1;
}
}  // namespace detail

// one explicit midpoint step; rejected steps leave the input metric untouched
inline StepResult flow_step(const WarpedMetric& m, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("flow_step: bad dt");
  StepResult res;
  res.metric = m;
  WarpedMetric half = m;
  FlowRhs k1 = flow_rhs(m);
  int bad = detail::apply_update(half, m, k1, 0.5 * dt);
  if (bad >= 0) {
    res.bad_index = bad;
    return res;
  }
  FlowRhs k2 = flow_rhs(half);
  bad = detail::apply_update(res.metric, m, k2, dt);
  if (bad >= 0) {
    res.metric = m;
    res.bad_index = bad;
    return res;
  }
  res.metric.time = m.time + dt;
  res.accepted = true;
  return res;
}

enum class StopReason { reached_t_end, equivalence_violated, step_limit, nonfinite_state };

inline std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::reached_t_end: return "reached_t_end";
    case StopReason::equivalence_violated: return "equivalence_violated";
    case StopReason::step_limit: return "step_limit";
    case StopReason::nonfinite_state: return "nonfinite_state";
  }
  return "unknown";
}

// max over grid and components of max(warp/warp0, warp0/warp)
inline double equivalence_ratio(const WarpedMetric& m, const WarpedMetric& g0) {
  double r = 1.0;
  for (int i = 0; i < m.n(); ++i) {
    r = std::max({r, m.w[i] / g0.w[i], g0.w[i] / m.w[i], m.a[i] / g0.a[i], g0.a[i] / m.a[i],
                  m.b[i] / g0.b[i], g0.b[i] / m.b[i]});
  }
  return r;
}

struct TrackerFlags {
  bool curvature = true;      // sup |Rm|, sup |Ric| and their time-weighted forms
  bool equivalence = true;    // warp ratio against g0
  bool tube_l2 = true;        // max over centers of windowed L^2 curvature
  bool volume = true;         // total volume
  bool concentration = true;  // max over centers of r^4/Vol * int |Rm|^2
};

struct FlowControls {
  double t_end = 0.1;
  double cfl_safety = 0.8;
  long max_steps = 2000000;
  double equivalence_limit = 2.0;
  std::vector<double> snapshot_times;
  std::optional<double> fixed_dt;  // overrides the CFL choice when set
  double dt_min = 1e-12;
  int tracker_cadence = 25;    // sample trackers every this many steps
  double tracker_radius = 0.5;  // tube radius for windowed trackers
  TrackerFlags trackers;
};

struct TrackerSample {
  double t = 0.0;
  double sup_rm = 0.0;
  double sup_ric = 0.0;
  double t_sup_rm = 0.0;
  double t23_sup_ric = 0.0;
  double equiv_ratio = 1.0;
  double tube_l2_max = 0.0;
  double volume = 0.0;
  double concentration_max = 0.0;
};

struct BoundReport {
  std::vector<TrackerSample> series;
  StopReason stop_reason = StopReason::reached_t_end;
  long steps = 0;
  double t_final = 0.0;
  double t1 = 0.0;  // start of the tracked window
  double max_t_sup_rm = 0.0;     // over samples with t >= t1
  double max_t23_sup_ric = 0.0;  // over samples with t >= t1
  double max_equiv_ratio = 1.0;
  int reject_index = -1;  // offending grid index for nonfinite_state stops
};

struct FlowTrajectory {
  std::vector<WarpedMetric> snapshots;  // initial state, requested times, final state
};

struct FlowResult {
  FlowTrajectory trajectory;
  BoundReport report;
};

namespace detail {
inline TrackerSample sample_trackers(const WarpedMetric& m, const WarpedMetric& g0,
                                     const FlowControls& fc) {
  TrackerSample s;
  s.t = m.time;
  CurvatureField c = curvature(m);
  if (fc.trackers.curvature) {
    s.sup_rm = c.sup_rm();
    s.sup_ric = c.sup_ric();
    s.t_sup_rm = m.time * s.sup_rm;
    s.t23_sup_ric = std::pow(m.time, 2.0 / 3.0) * s.sup_ric;
  }
  if (fc.trackers.equivalence) s.equiv_ratio = equivalence_ratio(m, g0);
  if (fc.trackers.volume) s.volume = volume(m);
  if (fc.trackers.tube_l2 || fc.trackers.concentration) {
    double rho = std::min(fc.tracker_radius, 0.5 * m.total_arclength() * (1.0 - 1e-9));
    double l2max = 0.0, concmax = 0.0;
    for (int i = 0; i < m.n(); ++i) {
      Tube t = tube_at(m, i, rho);
      double l2 = l2_curvature(m, c, t);
      l2max = std::max(l2max, l2);
      double vol = volume(m, t).value;
      if (vol > 0.0)
        concmax = std::max(concmax, std::pow(rho, 4.0) / vol * l2);
    }
    if (fc.trackers.tube_l2) s.tube_l2_max = l2max;
    if (fc.trackers.concentration) s.concentration_max = concmax;
  }
  return s;
}
}  // namespace detail

inline FlowResult run_flow(const WarpedMetric& g0, const FlowControls& fc) {
  validate_metric(g0);
  if (!(fc.t_end > g0.time)) throw std::invalid_argument("run_flow: t_end must exceed start time");
  if (!(fc.equivalence_limit > 1.0))
    throw std::invalid_argument("run_flow: equivalence_limit must exceed 1");

  std::vector<double> snaps = fc.snapshot_times;
  std::sort(snaps.begin(), snaps.end());
  snaps.erase(std::unique(snaps.begin(), snaps.end()), snaps.end());

  FlowResult out;
  out.trajectory.snapshots.push_back(g0);
  out.report.t1 = snaps.empty() ? 0.01 * fc.t_end : snaps.front();

  WarpedMetric m = g0;
  size_t next_snap = 0;
  while (next_snap < snaps.size() && snaps[next_snap] <= m.time) ++next_snap;

  auto record = [&](const TrackerSample& s) {
    out.report.series.push_back(s);
    if (s.t >= out.report.t1) {
      out.report.max_t_sup_rm = std::max(out.report.max_t_sup_rm, s.t_sup_rm);
      out.report.max_t23_sup_ric = std::max(out.report.max_t23_sup_ric, s.t23_sup_ric);
    }
    out.report.max_equiv_ratio = std::max(out.report.max_equiv_ratio, s.equiv_ratio);
  };
  record(detail::sample_trackers(m, g0, fc));

  long step = 0;
  StopReason reason = StopReason::reached_t_end;
  while (m.time < fc.t_end) {
    if (step >= fc.max_steps) {
      reason = StopReason::step_limit;
      break;
    }
    double dt = fc.fixed_dt ? *fc.fixed_dt : cfl_dt(m, fc.cfl_safety);
    bool boundary = false;
    if (next_snap < snaps.size() && m.time + dt >= snaps[next_snap] - 1e-15) {
      dt = snaps[next_snap] - m.time;
      boundary = true;
    }
    if (m.time + dt > fc.t_end) {
      dt = fc.t_end - m.time;
      boundary = true;
    }
    if (dt < fc.dt_min) {
      if (!boundary) {
        reason = StopReason::nonfinite_state;
        break;
      }
      // a snapshot or t_end within dt_min of the current time: treat as hit
      m.time = (next_snap < snaps.size() && boundary) ? std::min(fc.t_end, snaps[next_snap])
                                                      : fc.t_end;
    } else {
      StepResult sr = flow_step(m, dt);
      if (!sr.accepted) {
        reason = StopReason::nonfinite_state;
        out.report.reject_index = sr.bad_index;
        break;
      }
      m = std::move(sr.metric);
    }
    ++step;

    if (next_snap < snaps.size() && m.time >= snaps[next_snap] - 1e-15) {
      out.trajectory.snapshots.push_back(m);
      ++next_snap;
    }

    bool final_step = !(m.time < fc.t_end);
    if (fc.trackers.equivalence) {
      double ratio = equivalence_ratio(m, g0);
      if (ratio > fc.equivalence_limit) {
        record(detail::sample_trackers(m, g0, fc));
        reason = StopReason::equivalence_violated;
        break;
      }
    }
    if (step % std::max(1, fc.tracker_cadence) == 0 || final_step)
      record(detail::sample_trackers(m, g0, fc));
  }

  out.report.stop_reason = reason;
  out.report.steps = step;
  out.report.t_final = m.time;
  if (out.trajectory.snapshots.empty() ||
      out.trajectory.snapshots.back().time != m.time)
    out.trajectory.snapshots.push_back(m);
  return out;
}

// Finite-difference check of d(dV)/dt = -R dV along a trajectory: returns the
// max over snapshot pairs and grid nodes of |FD rate + R dV| / dV.
inline double dvol_residual(const FlowTrajectory& traj) {
  if (traj.snapshots.size() < 3)
    throw std::invalid_argument("dvol_residual: need at least 3 snapshots");
  double worst = 0.0;
  for (size_t k = 0; k + 1 < traj.snapshots.size(); ++k) {
    const WarpedMetric& m0 = traj.snapshots[k];
    const WarpedMetric& m1 = traj.snapshots[k + 1];
    double dt = m1.time - m0.time;
    if (!(dt > 0.0)) continue;
    CurvatureField c0 = curvature(m0), c1 = curvature(m1);
    for (int i = 0; i < m0.n(); ++i) {
      double dv0 = m0.w[i] * m0.a[i] * m0.b[i] * m0.b[i];
      double dv1 = m1.w[i] * m1.a[i] * m1.b[i] * m1.b[i];
      double rate = (dv1 - dv0) / dt;
      double mid_r_dv = 0.5 * (c0.scalar[i] * dv0 + c1.scalar[i] * dv1);
      double dv_mid = 0.5 * (dv0 + dv1);
      worst = std::max(worst, std::abs(rate + mid_r_dv) / dv_mid);
    }
  }
  return worst;
}

}  // namespace warplab
