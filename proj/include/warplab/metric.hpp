#pragma once

// Doubly warped product metrics  g = w(s)^2 ds^2 + a(s)^2 dtheta^2 + b(s)^2 g_{S^2}
// on the closed model S^1 x S^1 x S^2, together with the named profile
// families used by the experiment suites.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "warplab/core.hpp"

namespace warplab {

struct WarpedMetric {
  Grid grid;
  std::vector<double> w, a, b;
  double time = 0.0;

  int n() const { return grid.n; }
  double ds() const { return grid.ds(); }

  // arclength of the edge joining nodes i and i+1 (trapezoid-consistent)
  double edge_arc(int i) const {
    int j = grid.wrap(i + 1);
    return 0.5 * (w[static_cast<size_t>(grid.wrap(i))] + w[static_cast<size_t>(j)]) * ds();
  }

  double total_arclength() const {
    double s = 0.0;
    for (int i = 0; i < grid.n; ++i) s += edge_arc(i);
    return s;
  }
};

inline void validate_metric(const WarpedMetric& m) {
  if (static_cast<int>(m.w.size()) != m.grid.n || static_cast<int>(m.a.size()) != m.grid.n ||
      static_cast<int>(m.b.size()) != m.grid.n)
    throw std::invalid_argument("WarpedMetric: warp arrays must match the grid size");
  for (auto [arr, name] : {std::pair{&m.w, "w"}, std::pair{&m.a, "a"}, std::pair{&m.b, "b"}}) {
    int bad = first_nonpositive(*arr);
    if (bad >= 0)
      throw std::invalid_argument(std::string("WarpedMetric: warp ") + name +
                                  " nonpositive at index " + std::to_string(bad));
    if (!all_finite(*arr))
      throw std::invalid_argument(std::string("WarpedMetric: warp ") + name + " not finite");
  }
}

// ---- profile families -----------------------------------------------------

struct FlatProduct {
  double a0 = 1.0;
  double b0 = 1.0;
};

// Localized dip of the sphere radius b.  The dip depth is height*width^2
// (so `height` sets the curvature amplitude of the bump) with a periodic
// von Mises envelope of the given coordinate width.
struct BumpProfile {
  double center = 0.0;
  double height = 1.0;
  double width = 0.2;
  double a0 = 1.0;
  double b0 = 1.0;
};

struct CollapsedProfile {
  double a0 = 0.01;
  double b0 = 1.0;
  std::optional<BumpProfile> bump;  // optional b-dip on the collapsed background
};

struct CustomProfile {
  std::vector<double> w, a, b;
};

using ProfileSpec = std::variant<FlatProduct, BumpProfile, CollapsedProfile, CustomProfile>;

// smooth periodic bump envelope, ~exp(-((s-center)/width)^2/2) near the center
inline double vonmises_envelope(double s, double center, double width, double period) {
  double kappa = period / (two_pi * width);
  kappa *= kappa;
  double x = two_pi * (s - center) / period;
  return std::exp(kappa * (std::cos(x) - 1.0));
}

inline std::vector<double> bump_b_values(const Grid& g, const BumpProfile& p) {
  double depth = p.height * p.width * p.width;
  std::vector<double> b(static_cast<size_t>(g.n));
  for (int i = 0; i < g.n; ++i)
    b[static_cast<size_t>(i)] =
        p.b0 * (1.0 - depth * vonmises_envelope(g.coord(i), p.center, p.width, g.length));
  return b;
}

inline WarpedMetric build_metric(const ProfileSpec& spec, const Grid& g) {
  WarpedMetric m;
  m.grid = g;
  size_t n = static_cast<size_t>(g.n);
  if (const auto* fp = std::get_if<FlatProduct>(&spec)) {
    m.w.assign(n, 1.0);
    m.a.assign(n, fp->a0);
    m.b.assign(n, fp->b0);
  } else if (const auto* bp = std::get_if<BumpProfile>(&spec)) {
    m.w.assign(n, 1.0);
    m.a.assign(n, bp->a0);
    m.b = bump_b_values(g, *bp);
  } else if (const auto* cp = std::get_if<CollapsedProfile>(&spec)) {
    m.w.assign(n, 1.0);
    m.a.assign(n, cp->a0);
    if (cp->bump) {
      BumpProfile bb = *cp->bump;
      bb.b0 = cp->b0;
      m.b = bump_b_values(g, bb);
    } else {
      m.b.assign(n, cp->b0);
    }
  } else {
    const auto& cu = std::get<CustomProfile>(spec);
    m.w = cu.w;
    m.a = cu.a;
    m.b = cu.b;
  }
  validate_metric(m);
  return m;
}

// g -> lambda^2 g, realized on the warps.  Used by the parabolic rescaling
// covariance checks: the flow commutes with (w,a,b,t) -> (lw,la,lb,l^2 t).
inline WarpedMetric rescale_metric(const WarpedMetric& m, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("rescale_metric: lambda must be positive");
  WarpedMetric out = m;
  for (auto* arr : {&out.w, &out.a, &out.b})
    for (double& x : *arr) x *= lambda;
  out.time = m.time * lambda * lambda;
  return out;
}

}  // namespace warplab
