#pragma once

// Covering, comparability and concentration diagnostics on the arclength
// circle.
//
// covering: greedy 1-d cover of the 2r-tube by r-tubes with centers inside
// the 3r/2-tube (leftmost-uncovered scan, each new center pushed as far
// right as admissible).  ball_comparability: worst tube-volume ratio over
// nearby center pairs.  concentration_scan: the scale-invariant ratio
// r^4/Vol(T_r) * int_{T_r} |Rm|^2 at every center and at shrunken radii.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "warplab/curvature.hpp"
#include "warplab/tube.hpp"

namespace warplab {

struct Covering {
  std::vector<int> centers;
  int count = 0;
};

inline Covering covering(const WarpedMetric& m, int base_center, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("covering: radius must be positive");
  double half = 0.5 * m.total_arclength();
  if (!(2.0 * r < half))
    throw std::invalid_argument("covering: need 2r below half the total arclength");
  base_center = m.grid.wrap(base_center);

  Tube big = tube_at(m, base_center, 2.0 * r);        // points to cover
  Tube band = tube_at(m, base_center, 1.5 * r);       // admissible centers
  int band_first = band.first, band_last = band.first + band.count - 1;

  // arclength positions relative to the left edge of the big tube
  std::vector<double> pos(static_cast<size_t>(big.count), 0.0);
  for (int k = 1; k < big.count; ++k)
    pos[k] = pos[k - 1] + m.edge_arc(m.grid.wrap(big.first + k - 1));
  auto pos_of_node = [&](int node_unwrapped) {  // node in big-tube coordinates
    return pos[static_cast<size_t>(node_unwrapped - big.first)];
  };

  // band nodes in unwrapped big-tube coordinates
  int band_lo = band_first, band_hi = band_last;
  {
    // align the band window inside the big window (both contain base_center)
    int shift = 0;
    while (m.grid.wrap(big.first + shift) != m.grid.wrap(band_first)) ++shift;
    band_lo = big.first + shift;
    band_hi = band_lo + band.count - 1;
  }

  Covering cov;
  int scan = big.first;  // leftmost uncovered node (unwrapped)
  int guard = 0;
  while (scan <= big.first + big.count - 1) {
    if (++guard > big.count + 8)
      throw std::runtime_error("covering: greedy scan failed to terminate");
    double target = pos_of_node(scan);
    // furthest-right admissible center still within r of the scan point
    int chosen = -1;
    for (int j = band_hi; j >= band_lo; --j) {
      if (std::abs(pos_of_node(j) - target) <= r) {
        chosen = j;
        break;
      }
    }
    if (chosen < 0)
      throw std::runtime_error("covering: no admissible center for an uncovered point");
    cov.centers.push_back(m.grid.wrap(chosen));
    double cpos = pos_of_node(chosen);
    while (scan <= big.first + big.count - 1 && pos_of_node(scan) <= cpos + r) ++scan;
  }
  cov.count = static_cast<int>(cov.centers.size());
  return cov;
}

struct Comparability {
  double max_ratio = 1.0;
  int worst_center = 0;
  int worst_y1 = 0, worst_y2 = 0;
};

// worst Vol(T_r(y1)) / Vol(T_r(y2)) over pairs y1, y2 in the 3r/2-tube of a
// common center, maximized over all centers
inline Comparability ball_comparability(const WarpedMetric& m, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("ball_comparability: radius must be positive");
  double half = 0.5 * m.total_arclength();
  double rr = std::min(r, half * (1.0 - 1e-9));
  double band = std::min(1.5 * r, half * (1.0 - 1e-9));
  int n = m.n();
  std::vector<double> vols(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) vols[i] = volume(m, tube_at(m, i, rr)).value;

  Comparability out;
  for (int i = 0; i < n; ++i) {
    Tube t = tube_at(m, i, band);
    double lo = vols[m.grid.wrap(t.first)], hi = lo;
    int lo_j = t.first, hi_j = t.first;
    for (int k = 1; k < t.count; ++k) {
      int j = m.grid.wrap(t.first + k);
      if (vols[j] < lo) { lo = vols[j]; lo_j = j; }
      if (vols[j] > hi) { hi = vols[j]; hi_j = j; }
    }
    double ratio = hi / lo;
    if (ratio > out.max_ratio) {
      out.max_ratio = ratio;
      out.worst_center = i;
      out.worst_y1 = hi_j;
      out.worst_y2 = lo_j;
    }
  }
  return out;
}

struct ConcentrationRecord {
  int center = 0;
  double radius = 0.0;
  double volume = 0.0;
  double l2_curv = 0.0;
  double ratio = 0.0;          // r^4 / Vol * int |Rm|^2
  double sobolev_proxy = 0.0;  // (r^4 / Vol)^(1/2)
};

struct ConcentrationScan {
  std::vector<double> radii;
  std::vector<std::vector<ConcentrationRecord>> records;  // per radius, per center
  std::vector<double> max_ratio;                          // per radius
  std::vector<int> argmax_center;                         // per radius
};

inline ConcentrationScan concentration_scan(const WarpedMetric& m, double r,
                                            const std::vector<double>& shrink = {0.5, 0.25}) {
  if (!(r > 0.0)) throw std::invalid_argument("concentration_scan: radius must be positive");
  CurvatureField c = curvature(m);
  double half_arc = 0.5 * m.total_arclength();
  ConcentrationScan scan;
  scan.radii.push_back(r);
  for (double s : shrink) scan.radii.push_back(s * r);
  for (double rho : scan.radii) {
    double rr = std::min(rho, half_arc * (1.0 - 1e-9));
    std::vector<ConcentrationRecord> recs(static_cast<size_t>(m.n()));
    double best = 0.0;
    int best_i = 0;
    for (int i = 0; i < m.n(); ++i) {
      Tube t = tube_at(m, i, rr);
      ConcentrationRecord rec;
      rec.center = i;
      rec.radius = rho;
      rec.volume = volume(m, t).value;
      rec.l2_curv = l2_curvature(m, c, t);
      rec.ratio = rec.volume > 0.0
                      ? std::pow(rho, 4.0) / rec.volume * rec.l2_curv
                      : 0.0;
      rec.sobolev_proxy =
          rec.volume > 0.0 ? std::sqrt(std::pow(rho, 4.0) / rec.volume) : 0.0;
      if (rec.ratio > best) {
        best = rec.ratio;
        best_i = i;
      }
      recs[static_cast<size_t>(i)] = rec;
    }
    scan.records.push_back(std::move(recs));
    scan.max_ratio.push_back(best);
    scan.argmax_center.push_back(best_i);
  }
  return scan;
}

}  // namespace warplab
