#pragma once

// Heat flow with potential on a fixed warped background:
//
//   df/dt = Delta f + u f,   f(0) = f0 >= 0,  u >= 0
//
// solved as an equality (the sharpest instance of the differential
// inequality it models).  Forward Euler at the monotone CFL keeps the scheme
// positivity-preserving without clipping, and the potential budget
// (int u^3 dV)^(1/3) <= mu t^(-1/3) is checked at every sample, never
// assumed.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "warplab/operators.hpp"

namespace warplab {

struct HeatProblem {
  WarpedMetric metric;
  std::vector<double> f0;
  std::vector<double> u;    // potential, constant in time
  double horizon = 1.0;     // T
  double mu = 0.0;          // declared budget for (int u^3)^(1/3) * t^(1/3)
  double sobolev_A = 1.0;   // Sobolev constant of the working tube
  double cfl_safety = 0.9;
  int sample_count = 101;   // stored frames, evenly spaced over (0, T]
};

inline void validate_heat_problem(const HeatProblem& hp) {
  validate_metric(hp.metric);
  int n = hp.metric.n();
  if (static_cast<int>(hp.f0.size()) != n || static_cast<int>(hp.u.size()) != n)
    throw std::invalid_argument("HeatProblem: field sizes must match the grid");
  for (int i = 0; i < n; ++i) {
    if (!(hp.f0[i] >= 0.0) || !std::isfinite(hp.f0[i]))
      throw std::invalid_argument("HeatProblem: f0 must be nonnegative, bad index " +
                                  std::to_string(i));
    if (!(hp.u[i] >= 0.0) || !std::isfinite(hp.u[i]))
      throw std::invalid_argument("HeatProblem: u must be nonnegative, bad index " +
                                  std::to_string(i));
  }
  if (!(hp.horizon > 0.0)) throw std::invalid_argument("HeatProblem: horizon must be positive");
  if (hp.sample_count < 3) throw std::invalid_argument("HeatProblem: need >= 3 samples");
}

// largest forward-Euler step for which the update is monotone
inline double heat_cfl_dt(const WarpedMetric& m) {
  std::vector<double> q = edge_coefficients(m);
  double ds = m.ds();
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m.n(); ++i) {
    int im = m.grid.wrap(i - 1);
    double diag = (q[i] + q[im]) / (m.w[i] * m.a[i] * m.b[i] * m.b[i] * ds * ds);
    best = std::min(best, 1.0 / diag);
  }
  return best;
}

struct HeatSeries {
  std::vector<double> times;                // sample times, times.front() == 0
  std::vector<std::vector<double>> frames;  // one field per sample time
  bool budget_ok = true;
  double budget_worst = 0.0;  // max over samples of ||u||_3 * t^(1/3) / mu
  double dt = 0.0;

  const std::vector<double>& at_time(double t) const {
    for (size_t k = 0; k < times.size(); ++k)
      if (std::abs(times[k] - t) <= 1e-12 * std::max(1.0, std::abs(t))) return frames[k];
    throw std::invalid_argument("HeatSeries: time not among the stored samples");
  }
};

inline HeatSeries heat_solve(const HeatProblem& hp, std::optional<double> dt_override = {}) {
  validate_heat_problem(hp);
  const WarpedMetric& m = hp.metric;
  int n = m.n();
  double cfl = heat_cfl_dt(m);
  double dt = dt_override ? *dt_override : hp.cfl_safety * cfl;
  if (dt > cfl * (1.0 + 1e-12))
    throw std::invalid_argument("heat_solve: requested dt violates the monotone CFL");

  HeatSeries out;
  out.dt = dt;
  out.times.resize(static_cast<size_t>(hp.sample_count));
  for (int k = 0; k < hp.sample_count; ++k)
    out.times[k] = hp.horizon * k / (hp.sample_count - 1);
  out.frames.reserve(out.times.size());
  out.frames.push_back(hp.f0);

  double u_l3 = lp_norm(m, hp.u, 3.0);
  for (size_t k = 1; k < out.times.size(); ++k) {
    double t = out.times[k];
    double margin = hp.mu > 0.0 ? u_l3 * std::cbrt(t) / hp.mu
                                : (u_l3 > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    out.budget_worst = std::max(out.budget_worst, margin);
  }
  out.budget_ok = out.budget_worst <= 1.0 + 1e-12;

  std::vector<double> q = edge_coefficients(m);
  double ds = m.ds();
  std::vector<double> f = hp.f0, next(static_cast<size_t>(n));
  double t = 0.0;
  for (size_t k = 1; k < out.times.size(); ++k) {
    double target = out.times[k];
    long sub = std::max(1L, static_cast<long>(std::ceil((target - t) / dt - 1e-12)));
    double h = (target - t) / sub;
    for (long s = 0; s < sub; ++s) {
      for (int i = 0; i < n; ++i) {
        int ip = m.grid.wrap(i + 1), im = m.grid.wrap(i - 1);
        double lap = (q[i] * (f[ip] - f[i]) - q[im] * (f[i] - f[im])) /
                     (m.w[i] * m.a[i] * m.b[i] * m.b[i] * ds * ds);
        next[i] = f[i] + h * (lap + hp.u[i] * f[i]);
      }
      f.swap(next);
    }
    t = target;
    out.frames.push_back(f);
  }
  return out;
}

}  // namespace warplab
