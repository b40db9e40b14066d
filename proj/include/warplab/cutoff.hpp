#pragma once

// Cutoff functions for the localized integral estimates.
//
// Spatial cutoff: radial C^2 piecewise-polynomial bump, identically 1 on the
// inner tube of radius r_inner, 0 outside radius r_outer, quintic smoothstep
// on the annulus.  Its arclength gradient obeys |chi'| <= (15/8)/(r-r'),
// within the declared budget 2/(r-r').
//
// Time cutoff: psi = 0 before tau, linear on [tau, tau'], 1 after tau'.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "warplab/tube.hpp"

namespace warplab {

inline double quintic_smoothstep(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
}

inline RadialFunction radial_cutoff(const WarpedMetric& m, int center, double r_outer,
                                    double r_inner) {
  if (!(r_inner > 0.0) || !(r_outer > r_inner))
    throw std::invalid_argument("radial_cutoff: need 0 < r_inner < r_outer");
  RadialFunction chi = RadialFunction::constant(m.grid, 0.0, "chi");
  center = m.grid.wrap(center);

  // walk outward accumulating arc distance, mirroring tube_at's scan
  auto set_side = [&](int dir) {
    double d = 0.0;
    chi.values[center] = 1.0;
    for (int k = 1; k < m.n(); ++k) {
      int i = dir > 0 ? center + k : center - k;
      d += dir > 0 ? m.edge_arc(m.grid.wrap(i - 1)) : m.edge_arc(m.grid.wrap(i));
      if (d > r_outer) break;
      double v;
      if (d <= r_inner)
        v = 1.0;
      else
        v = quintic_smoothstep((r_outer - d) / (r_outer - r_inner));
      size_t j = static_cast<size_t>(m.grid.wrap(i));
      chi.values[j] = std::max(chi.values[j], v);
    }
  };
  set_side(+1);
  set_side(-1);
  return chi;
}

inline double time_cutoff(double t, double tau, double tau_prime) {
  if (!(tau_prime > tau)) throw std::invalid_argument("time_cutoff: need tau' > tau");
  if (t <= tau) return 0.0;
  if (t >= tau_prime) return 1.0;
  return (t - tau) / (tau_prime - tau);
}

}  // namespace warplab
