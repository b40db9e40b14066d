#pragma once

// Arclength tubes around a base point: the fiber-saturated stand-in for
// geodesic balls on the closed model.  A tube of radius rho at node i0 is
// the contiguous set of nodes whose shortest-arc distance from i0 is at
// most rho, together with the fiber diameter max(pi a, pi b) that controls
// the sandwich  T_{rho - d_f}  <=  B_rho  <=  T_rho.
//
// Tube volumes and windowed L^2 curvature use trapezoid quadrature over the
// covered arc (half weights at the two boundary nodes); a tube that wraps
// the whole circle degenerates to the periodic sum.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "warplab/curvature.hpp"
#include "warplab/metric.hpp"

namespace warplab {

struct Tube {
  int center = 0;
  double radius = 0.0;
  int first = 0;  // leftmost node index (wrapped)
  int count = 0;  // number of contiguous nodes; count == n means the whole circle
  double fiber_diameter = 0.0;
  bool whole = false;

  int node(int k) const { return first + k; }  // caller wraps
};

// distance from node i0 to node j along the shorter arc (independent scan,
// also used by the brute-force oracle in the tests)
inline double arc_distance(const WarpedMetric& m, int i0, int j) {
  int n = m.n();
  double right = 0.0;
  for (int i = i0; m.grid.wrap(i) != m.grid.wrap(j); ++i) {
    right += m.edge_arc(m.grid.wrap(i));
    if (i - i0 > n) break;
  }
  double left = 0.0;
  for (int i = i0; m.grid.wrap(i) != m.grid.wrap(j); --i) {
    left += m.edge_arc(m.grid.wrap(i - 1));
    if (i0 - i > n) break;
  }
  return std::min(left, right);
}

inline Tube tube_at(const WarpedMetric& m, int center, double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho))
    throw std::invalid_argument("tube_at: radius must be positive and finite");
  int n = m.n();
  center = m.grid.wrap(center);
  double half = 0.5 * m.total_arclength();
  if (rho > half * (1.0 + 1e-12))
    throw std::invalid_argument("tube_at: radius exceeds half the total arclength");

  Tube t;
  t.center = center;
  t.radius = rho;

  // expand left and right until the cumulative arc passes rho
  int lo = 0, hi = 0;
  double dl = 0.0, dr = 0.0;
  while (lo - 1 > -n) {
    double step = m.edge_arc(m.grid.wrap(center + lo - 1));
    if (dl + step > rho) break;
    dl += step;
    --lo;
  }
  while (hi + 1 < n + lo) {  // never run past the left edge of the window
    double step = m.edge_arc(m.grid.wrap(center + hi));
    if (dr + step > rho) break;
    dr += step;
    ++hi;
  }
  t.first = m.grid.wrap(center + lo);
  t.count = hi - lo + 1;
  if (t.count >= n) {
    t.count = n;
    t.whole = true;
    t.first = 0;
  }

  double fd = 0.0;
  for (int k = 0; k < t.count; ++k) {
    int i = m.grid.wrap(t.first + k);
    fd = std::max({fd, pi * m.a[i], pi * m.b[i]});
  }
  t.fiber_diameter = fd;
  return t;
}

struct RegionIntegral {
  double value = 0.0;
  bool empty = false;
};

// trapezoid quadrature of a node density rho_i = 8 pi^2 w a b^2 * field over
// the tube's covered arc
inline RegionIntegral tube_integral(const WarpedMetric& m, const Tube& t,
                                    const std::vector<double>& field) {
  if (t.count <= 0) return {0.0, true};
  double ds = m.ds();
  double s = 0.0;
  for (int k = 0; k < t.count; ++k) {
    int i = m.grid.wrap(t.first + k);
    double weight = 1.0;
    if (!t.whole && t.count >= 2 && (k == 0 || k == t.count - 1)) weight = 0.5;
    s += weight * eight_pi_sq * m.w[i] * m.a[i] * m.b[i] * m.b[i] * field[i] * ds;
  }
  return {s, false};
}

inline double volume(const WarpedMetric& m) {
  double s = 0.0;
  double ds = m.ds();
  for (int i = 0; i < m.n(); ++i) s += eight_pi_sq * m.w[i] * m.a[i] * m.b[i] * m.b[i] * ds;
  return s;
}

inline RegionIntegral volume(const WarpedMetric& m, const Tube& t) {
  std::vector<double> one(static_cast<size_t>(m.n()), 1.0);
  return tube_integral(m, t, one);
}

inline double l2_curvature(const WarpedMetric& m, const CurvatureField& c, const Tube& t) {
  return tube_integral(m, t, c.riem_norm_sq).value;
}

inline double l2_curvature(const WarpedMetric& m, const Tube& t) {
  CurvatureField c = curvature(m);
  return l2_curvature(m, c, t);
}

inline double l2_curvature(const WarpedMetric& m) {
  CurvatureField c = curvature(m);
  return integral(m, c.riem_norm_sq);
}

}  // namespace warplab
