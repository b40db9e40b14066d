#pragma once

// Measured Sobolev constant of a tube:  the best A in
//
//   ||f||_4^2 <= A ||grad f||_2^2,    f radial, compactly supported in the tube,
//
// estimated by projected gradient ascent on the Rayleigh ratio
// (int f^4 dV)^(1/2) / int |grad f|^2 dV with multi-start.  The search runs
// over radial trial functions only, so the result is a certified lower bound
// on the true constant of the tube; restart scatter is reported so callers
// can judge convergence.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "warplab/operators.hpp"
#include "warplab/rng.hpp"
#include "warplab/tube.hpp"

namespace warplab {

struct SobolevControls {
  int restarts = 6;
  int max_iters = 4000;
  double tol = 1e-12;        // relative ratio improvement considered converged
  uint64_t seed = 1;
  std::vector<std::vector<double>> warm_starts;  // extra initial trial functions
};

struct SobolevEstimate {
  double A = 0.0;
  std::vector<double> maximizer;
  bool converged = false;
  int iterations = 0;        // iterations of the winning restart
  double restart_spread = 0.0;  // (best - worst) / best over converged restarts
  std::vector<double> restart_values;  // converged ratios, one per start
};

namespace sobolev_detail {

inline double rayleigh_ratio(const WarpedMetric& m, const std::vector<double>& mu,
                             const std::vector<double>& f) {
  double f4 = 0.0;
  for (size_t i = 0; i < f.size(); ++i) f4 += f[i] * f[i] * f[i] * f[i] * mu[i];
  double e = dirichlet_energy(m, f);
  if (!(e > 0.0)) return 0.0;
  return std::sqrt(f4) / e;
}

struct AscentOutcome {
  double ratio = 0.0;
  std::vector<double> f;
  bool converged = false;
  int iters = 0;
};

inline AscentOutcome ascend(const WarpedMetric& m, const std::vector<double>& mu,
                            const std::vector<int>& interior, std::vector<double> f,
                            const SobolevControls& ctl) {
  auto project = [&](std::vector<double>& v) {
    std::vector<double> masked(v.size(), 0.0);
    for (int i : interior) masked[i] = v[i];
    v.swap(masked);
  };
  project(f);
  double ratio = rayleigh_ratio(m, mu, f);
  AscentOutcome out;
  if (!(ratio > 0.0)) return out;

  double step = 0.25;
  int it = 0;
  for (; it < ctl.max_iters; ++it) {
    double f4 = 0.0;
    for (size_t i = 0; i < f.size(); ++i) f4 += f[i] * f[i] * f[i] * f[i] * mu[i];
    double e = dirichlet_energy(m, f);
    std::vector<double> lap = laplacian_radial(m, f);
    // gradient of log ratio, preconditioned by the node measure
    std::vector<double> g(f.size(), 0.0);
    for (int i : interior) g[i] = 2.0 * f[i] * f[i] * f[i] / f4 - 2.0 * (-lap[i]) / e;
    double gnorm = sup_abs(g);
    if (gnorm == 0.0) break;
    double fnorm = sup_abs(f);

    bool improved = false;
    while (step > 1e-14) {
      std::vector<double> trial = f;
      for (int i : interior) trial[i] += step * fnorm * g[i] / gnorm;
      double tr = rayleigh_ratio(m, mu, trial);
      if (tr > ratio) {
        double gain = (tr - ratio) / ratio;
        f.swap(trial);
        ratio = tr;
        improved = true;
        if (gain < ctl.tol) {
          out.converged = true;
          it = ctl.max_iters;  // done
        }
        step = std::min(0.5, step * 1.3);
        break;
      }
      step *= 0.5;
    }
    if (!improved) {
      out.converged = true;
      break;
    }
  }
  // normalize ||f||_4 = 1 for a tidy reported maximizer
  double f4 = 0.0;
  for (size_t i = 0; i < f.size(); ++i) f4 += f[i] * f[i] * f[i] * f[i] * mu[i];
  if (f4 > 0.0)
    for (double& x : f) x /= std::pow(f4, 0.25);
  out.ratio = rayleigh_ratio(m, mu, f);
  out.f = std::move(f);
  out.iters = std::min(it, ctl.max_iters);
  return out;
}

}  // namespace sobolev_detail

inline SobolevEstimate sobolev_estimate(const WarpedMetric& m, const Tube& tube,
                                        const SobolevControls& ctl = {}) {
  if (tube.whole)
    throw std::invalid_argument(
        "sobolev_estimate: needs a proper tube (constants defeat the inequality on the whole "
        "manifold)");
  std::vector<int> interior;
  for (int k = 1; k + 1 < tube.count; ++k) interior.push_back(m.grid.wrap(tube.first + k));
  if (static_cast<int>(interior.size()) < 8)
    throw std::invalid_argument("sobolev_estimate: tube needs at least 8 interior points");

  std::vector<double> mu = node_measure(m);
  Rng rng(ctl.seed);

  SobolevEstimate best;
  double worst_converged = 0.0;
  auto consider = [&](std::vector<double> start) {
    auto res = sobolev_detail::ascend(m, mu, interior, std::move(start), ctl);
    if (res.converged && res.ratio > 0.0) {
      if (worst_converged == 0.0 || res.ratio < worst_converged) worst_converged = res.ratio;
      best.restart_values.push_back(res.ratio);
    }
    if (res.ratio > best.A) {
      best.A = res.ratio;
      best.maximizer = res.f;
      best.converged = res.converged;
      best.iterations = res.iters;
    }
  };

  // deterministic first start: a centered bump over the interior
  {
    std::vector<double> f(static_cast<size_t>(m.n()), 0.0);
    int c = static_cast<int>(interior.size()) / 2;
    for (size_t k = 0; k < interior.size(); ++k) {
      double x = (static_cast<double>(k) - c) / std::max<size_t>(1, interior.size() / 2);
      f[interior[k]] = std::max(0.0, 1.0 - x * x);
    }
    consider(std::move(f));
  }
  for (int rs = 1; rs < ctl.restarts; ++rs) {
    std::vector<double> f(static_cast<size_t>(m.n()), 0.0);
    for (int i : interior) f[i] = rng.uniform(0.05, 1.0);
    consider(std::move(f));
  }
  for (const auto& wsf : ctl.warm_starts) consider(wsf);

  if (best.A > 0.0 && worst_converged > 0.0)
    best.restart_spread = (best.A - worst_converged) / best.A;
  return best;
}

}  // namespace warplab
