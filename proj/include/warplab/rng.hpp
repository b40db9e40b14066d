#pragma once

// Deterministic seeded randomness for the suites.  Uniform doubles are
// derived from the raw 64-bit stream directly so results are reproducible
// across standard library implementations.  Random smooth fields draw their
// Fourier coefficients before any grid evaluation, so the same seed yields
// the same continuum field on every resolution (needed by the grid-doubling
// stability checks).

#include <cstdint>
#include <random>
#include <vector>

#include "warplab/metric.hpp"

namespace warplab {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(splitmix64(seed)) {}

  uint64_t raw() { return eng_(); }

  double uniform() {  // in [0, 1)
    return static_cast<double>(raw() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(raw() % static_cast<uint64_t>(hi - lo + 1));
  }

 private:
  std::mt19937_64 eng_;
};

// substream seed for member `index` of a sweep driven by `base`
inline uint64_t substream(uint64_t base, uint64_t index) {
  return splitmix64(base ^ (0xa076'1d64'78bd'642fULL * (index + 1)));
}

struct SmoothFieldSpec {
  double lo = 0.5;
  double hi = 2.0;
  int max_mode = 3;
};

// smooth positive random field in [lo, hi]; the normalization uses the
// coefficient budget (not a grid max), hence is grid-independent
inline RadialFunction random_smooth_field(const Grid& g, Rng& rng,
                                          const SmoothFieldSpec& spec = {}) {
  int modes = spec.max_mode;
  std::vector<double> ca(static_cast<size_t>(modes)), cb(static_cast<size_t>(modes));
  double budget = 0.0;
  for (int k = 0; k < modes; ++k) {
    ca[k] = rng.uniform(-1.0, 1.0) / (k + 1);
    cb[k] = rng.uniform(-1.0, 1.0) / (k + 1);
    budget += std::abs(ca[k]) + std::abs(cb[k]);
  }
  if (budget <= 0.0) budget = 1.0;
  RadialFunction f = RadialFunction::constant(g, 0.0);
  for (int i = 0; i < g.n; ++i) {
    double s = g.coord(i), v = 0.0;
    for (int k = 0; k < modes; ++k) {
      double x = two_pi * (k + 1) * s / g.length;
      v += ca[k] * std::cos(x) + cb[k] * std::sin(x);
    }
    v /= budget;  // v in [-1, 1]
    f.values[static_cast<size_t>(i)] = spec.lo + 0.5 * (spec.hi - spec.lo) * (v + 1.0);
  }
  return f;
}

// mildly perturbed metric for the randomized suites: warps stay well away
// from zero and curvature stays at desk scale
inline WarpedMetric random_mild_metric(const Grid& g, Rng& rng) {
  WarpedMetric m;
  m.grid = g;
  m.w = random_smooth_field(g, rng, {0.85, 1.15, 2}).values;
  m.a = random_smooth_field(g, rng, {0.8, 1.2, 2}).values;
  m.b = random_smooth_field(g, rng, {0.85, 1.25, 2}).values;
  validate_metric(m);
  return m;
}

}  // namespace warplab
