#pragma once

// Scalar model of the curvature smoothing step:
//
//   df/dt = Delta f + C0 f^2
//
// on a fixed background.  Runs track sup f and the windowed L^2 size
// e0(t) = max over centers of (int_{T_r} f^2)^(1/2), detect finite-time
// blowup (the Riccati regime), and report whether the run survives the
// quoted horizon.  A companion linear problem du/dt = Delta u + c0 f u
// tracks the decay ratio t^(2/3) sup u / (A^(2/3) (int u0^3)^(1/3)).

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "warplab/heat.hpp"
#include "warplab/tube.hpp"

namespace warplab {

struct SmoothingControls {
  double c0 = 1.0;          // reaction coefficient C0
  double radius = 0.5;      // tube radius r of the hypothesis window
  double sobolev_A = 1.0;   // measured Sobolev constant of the tube family
  double horizon = 1.0;     // run length T
  double cfl_safety = 0.9;
  double blowup_sup = 1e12;  // sup f beyond this counts as blown up
  double dt_min = 1e-14;
  int check_cadence = 20;    // tracker evaluation every this many steps
  double window_frac = 0.01; // tracked window starts at window_frac * horizon
  double c0_coupling = 1.0;  // c0 of the companion linear problem
};

struct SmoothingReport {
  bool threshold_ok = false;   // max tube (int f0^2)^(1/2) <= 1/(6 C0 A)
  double initial_e0 = 0.0;
  double threshold = 0.0;      // 1/(6 C0 A)
  double tracking_bound = 0.0; // 1/(3 C0 A)
  double e0_max = 0.0;
  double e0_cross_time = -1.0; // first time e0 exceeded the tracking bound, -1 if never
  double max_t_sup_f = 0.0;    // over the tracked window
  bool blew_up = false;
  double blowup_time = -1.0;
  double t_final = 0.0;
};

namespace smoothing_detail {
inline double e0_scan(const WarpedMetric& m, const std::vector<double>& f, double radius) {
  std::vector<double> f2(f.size());
  for (size_t i = 0; i < f.size(); ++i) f2[i] = f[i] * f[i];
  double rho = std::min(radius, 0.5 * m.total_arclength() * (1.0 - 1e-9));
  double worst = 0.0;
  for (int i = 0; i < m.n(); ++i)
    worst = std::max(worst, tube_integral(m, tube_at(m, i, rho), f2).value);
  return std::sqrt(worst);
}
}  // namespace smoothing_detail

inline SmoothingReport scalar_smoothing_check(const WarpedMetric& m,
                                              const std::vector<double>& f0,
                                              const SmoothingControls& sc) {
  validate_metric(m);
  int n = m.n();
  if (static_cast<int>(f0.size()) != n)
    throw std::invalid_argument("scalar_smoothing_check: f0 size mismatch");
  for (double x : f0)
    if (!(x >= 0.0) || !std::isfinite(x))
      throw std::invalid_argument("scalar_smoothing_check: f0 must be nonnegative");

  SmoothingReport rep;
  rep.threshold = 1.0 / (6.0 * sc.c0 * sc.sobolev_A);
  rep.tracking_bound = 1.0 / (3.0 * sc.c0 * sc.sobolev_A);
  rep.initial_e0 = smoothing_detail::e0_scan(m, f0, sc.radius);
  rep.threshold_ok = rep.initial_e0 <= rep.threshold * (1.0 + 1e-12);
  rep.e0_max = rep.initial_e0;

  std::vector<double> q = edge_coefficients(m);
  double ds = m.ds();
  double diff_dt = sc.cfl_safety * heat_cfl_dt(m);
  std::vector<double> f = f0, next(static_cast<size_t>(n));
  double t = 0.0;
  long step = 0;
  double t1 = sc.window_frac * sc.horizon;
  while (t < sc.horizon) {
    double sup_f = sup_abs(f);
    double remaining = sc.horizon - t;
    if (remaining <= sc.dt_min) {  // landing rounded a hair short of the horizon
      t = sc.horizon;
      break;
    }
    double dt = diff_dt;
    if (sup_f > 0.0) dt = std::min(dt, 0.2 / (sc.c0 * sup_f));
    dt = std::min(dt, remaining);
    if (dt < sc.dt_min || sup_f > sc.blowup_sup) {
      rep.blew_up = true;
      rep.blowup_time = t;
      break;
    }
    for (int i = 0; i < n; ++i) {
      int ip = m.grid.wrap(i + 1), im = m.grid.wrap(i - 1);
      double lap = (q[i] * (f[ip] - f[i]) - q[im] * (f[i] - f[im])) /
                   (m.w[i] * m.a[i] * m.b[i] * m.b[i] * ds * ds);
      next[i] = f[i] + dt * (lap + sc.c0 * f[i] * f[i]);
    }
    f.swap(next);
    t += dt;
    ++step;
    if (!all_finite(f)) {
      rep.blew_up = true;
      rep.blowup_time = t;
      break;
    }
    if (step % sc.check_cadence == 0 || !(t < sc.horizon)) {
      double e0 = smoothing_detail::e0_scan(m, f, sc.radius);
      rep.e0_max = std::max(rep.e0_max, e0);
      if (rep.e0_cross_time < 0.0 && e0 > rep.tracking_bound) rep.e0_cross_time = t;
      if (t >= t1) rep.max_t_sup_f = std::max(rep.max_t_sup_f, t * sup_abs(f));
    }
  }
  rep.t_final = t;
  return rep;
}

struct DecayReport {
  double max_ratio = 0.0;  // max over window of t^(2/3) sup u / (A^(2/3) (int u0^3)^(1/3))
  double u0_l3 = 0.0;
  bool blew_up = false;
  double t_final = 0.0;
};

// co-evolves the quadratic f-problem and the linear u-problem on the same
// time steps so that the coupling term uses the exact companion solution
inline DecayReport corollary_decay_check(const WarpedMetric& m, const std::vector<double>& f0,
                                         const std::vector<double>& u0,
                                         const SmoothingControls& sc) {
  validate_metric(m);
  int n = m.n();
  if (static_cast<int>(f0.size()) != n || static_cast<int>(u0.size()) != n)
    throw std::invalid_argument("corollary_decay_check: field size mismatch");

  DecayReport rep;
  rep.u0_l3 = lp_norm(m, u0, 3.0);
  double denom = std::pow(sc.sobolev_A, 2.0 / 3.0) * rep.u0_l3;
  if (!(denom > 0.0)) throw std::invalid_argument("corollary_decay_check: trivial u0");

  std::vector<double> q = edge_coefficients(m);
  double ds = m.ds();
  double diff_dt = sc.cfl_safety * heat_cfl_dt(m);
  std::vector<double> f = f0, u = u0;
  std::vector<double> fn(static_cast<size_t>(n)), un(static_cast<size_t>(n));
  double t = 0.0;
  long step = 0;
  double t1 = sc.window_frac * sc.horizon;
  while (t < sc.horizon) {
    double sup_f = sup_abs(f);
    double remaining = sc.horizon - t;
    if (remaining <= sc.dt_min) {
      t = sc.horizon;
      break;
    }
    double dt = diff_dt;
    if (sup_f > 0.0) dt = std::min(dt, 0.2 / (std::max(sc.c0, sc.c0_coupling) * sup_f));
    dt = std::min(dt, remaining);
    if (dt < sc.dt_min || sup_f > sc.blowup_sup) {
      rep.blew_up = true;
      break;
    }
    for (int i = 0; i < n; ++i) {
      int ip = m.grid.wrap(i + 1), im = m.grid.wrap(i - 1);
      double vol_i = m.w[i] * m.a[i] * m.b[i] * m.b[i] * ds * ds;
      double lap_f = (q[i] * (f[ip] - f[i]) - q[im] * (f[i] - f[im])) / vol_i;
      double lap_u = (q[i] * (u[ip] - u[i]) - q[im] * (u[i] - u[im])) / vol_i;
      fn[i] = f[i] + dt * (lap_f + sc.c0 * f[i] * f[i]);
      un[i] = u[i] + dt * (lap_u + sc.c0_coupling * f[i] * u[i]);
    }
    f.swap(fn);
    u.swap(un);
    t += dt;
    ++step;
    if (!all_finite(f) || !all_finite(u)) {
      rep.blew_up = true;
      break;
    }
    if ((step % sc.check_cadence == 0 || !(t < sc.horizon)) && t >= t1) {
      double ratio = std::pow(t, 2.0 / 3.0) * sup_abs(u) / denom;
      rep.max_ratio = std::max(rep.max_ratio, ratio);
    }
  }
  rep.t_final = t;
  return rep;
}

}  // namespace warplab
