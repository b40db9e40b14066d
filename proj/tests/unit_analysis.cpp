#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "warplab/analysis.hpp"
#include "warplab/rng.hpp"

using namespace warplab;
using Catch::Approx;

namespace {

// brute-force check that every node of the 2r-tube lies within r of a center
bool covers(const WarpedMetric& m, int base, double r, const std::vector<int>& centers) {
  for (int j = 0; j < m.n(); ++j) {
    if (arc_distance(m, base, j) > 2.0 * r) continue;
    bool hit = false;
    for (int c : centers)
      if (arc_distance(m, c, j) <= r * (1.0 + 1e-12)) {
        hit = true;
        break;
      }
    if (!hit) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("greedy covering is small, admissible and verified", "[analysis]") {
  WarpedMetric flat = build_metric(FlatProduct{}, Grid::make(256, two_pi));
  Covering cov = covering(flat, 64, 0.5);
  REQUIRE(cov.count >= 2);
  REQUIRE(cov.count <= 5);
  REQUIRE(covers(flat, 64, 0.5, cov.centers));
  for (int c : cov.centers) REQUIRE(arc_distance(flat, 64, c) <= 1.5 * 0.5 * (1.0 + 1e-12));

  for (uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(900 + seed);
    WarpedMetric m = random_mild_metric(Grid::make(192, two_pi), rng);
    int base = rng.uniform_int(0, m.n() - 1);
    double r = 0.5;
    Covering c = covering(m, base, r);
    INFO("seed " << seed << " count " << c.count);
    REQUIRE(c.count <= 8);
    REQUIRE(covers(m, base, r, c.centers));
    for (int cc : c.centers) REQUIRE(arc_distance(m, base, cc) <= 1.5 * r * (1.0 + 1e-12));
  }
}

TEST_CASE("covering sees only the arclength parametrization", "[analysis]") {
  // doubling w is the same circle as doubling the coordinate period
  int n = 200;
  WarpedMetric dense = build_metric(FlatProduct{}, Grid::make(n, two_pi));
  for (double& x : dense.w) x = 2.0;
  WarpedMetric wide = build_metric(FlatProduct{}, Grid::make(n, 2.0 * two_pi));
  Covering cd = covering(dense, 50, 0.8);
  Covering cw = covering(wide, 50, 0.8);
  REQUIRE(cd.count == cw.count);
  REQUIRE(cd.centers == cw.centers);
}

TEST_CASE("covering rejects tubes that wrap the circle", "[analysis]") {
  WarpedMetric m = build_metric(FlatProduct{}, Grid::make(64, two_pi));
  REQUIRE_THROWS_AS(covering(m, 0, 0.5 * pi), std::invalid_argument);
  REQUIRE_THROWS_AS(covering(m, 0, -1.0), std::invalid_argument);
}

TEST_CASE("tube volumes are exactly comparable on homogeneous circles", "[analysis]") {
  WarpedMetric flat = build_metric(FlatProduct{0.7, 1.2}, Grid::make(128, two_pi));
  Comparability cmp = ball_comparability(flat, 0.5);
  REQUIRE(cmp.max_ratio == 1.0);
}

TEST_CASE("comparability stays under the ricci-based oracle bound", "[analysis]") {
  for (uint64_t seed : {5ull, 6ull, 7ull}) {
    Rng rng(seed);
    WarpedMetric m = random_mild_metric(Grid::make(192, two_pi), rng);
    double r = 0.5;
    Comparability cmp = ball_comparability(m, r);
    CurvatureField c = curvature(m);
    double k = 0.0;
    for (double x : c.ric_r) k = std::max(k, -x);
    double d = arc_distance(m, cmp.worst_y1, cmp.worst_y2);
    double pair_bound = std::exp(std::sqrt(3.0 * k) * d);
    double band_bound = std::exp(std::sqrt(3.0 * k) * 3.0 * r);
    INFO("seed " << seed << " ratio " << cmp.max_ratio << " pair bound " << pair_bound);
    REQUIRE(cmp.max_ratio > 1.0);
    REQUIRE(cmp.max_ratio <= pair_bound * 1.001);
    REQUIRE(cmp.max_ratio <= band_bound * 1.001);
  }
}

TEST_CASE("concentration ratio takes its closed form on the flat product", "[analysis]") {
  double b0 = 1.3, r = 0.5;
  WarpedMetric m = build_metric(FlatProduct{0.9, b0}, Grid::make(128, two_pi));
  ConcentrationScan scan = concentration_scan(m, r);
  REQUIRE(scan.radii.size() == 3);
  REQUIRE(scan.radii[1] == Approx(0.5 * r));
  REQUIRE(scan.radii[2] == Approx(0.25 * r));
  // |Rm|^2 is the constant 4/b0^4, so the ratio collapses to 4 rho^4 / b0^4
  for (size_t k = 0; k < scan.radii.size(); ++k) {
    double rho = scan.radii[k];
    REQUIRE(scan.max_ratio[k] == Approx(4.0 * std::pow(rho, 4.0) / std::pow(b0, 4.0))
                                     .epsilon(1e-12));
    for (const ConcentrationRecord& rec : scan.records[k]) {
      REQUIRE(rec.ratio == Approx(scan.max_ratio[k]).epsilon(1e-12));
      REQUIRE(rec.sobolev_proxy ==
              Approx(std::sqrt(std::pow(rho, 4.0) / rec.volume)).epsilon(1e-12));
      REQUIRE(rec.l2_curv == Approx(4.0 / std::pow(b0, 4.0) * rec.volume).epsilon(1e-12));
    }
  }
}

TEST_CASE("concentration ratio is scale invariant", "[analysis]") {
  Grid g = Grid::make(128, two_pi);
  BumpProfile p;
  p.center = pi;
  p.height = 1.2;
  p.width = 0.4;
  WarpedMetric m = build_metric(p, g);
  ConcentrationScan base = concentration_scan(m, 0.5);
  ConcentrationScan scaled = concentration_scan(rescale_metric(m, 2.0), 1.0);
  for (size_t k = 0; k < base.radii.size(); ++k) {
    REQUIRE(scaled.max_ratio[k] == Approx(base.max_ratio[k]).epsilon(1e-12));
    REQUIRE(scaled.argmax_center[k] == base.argmax_center[k]);
  }
}

TEST_CASE("concentration localizes at the curvature bump", "[analysis]") {
  Grid g = Grid::make(256, two_pi);
  BumpProfile p;
  p.center = g.coord(128);
  p.height = 2.0;
  p.width = 0.35;
  WarpedMetric m = build_metric(p, g);
  ConcentrationScan scan = concentration_scan(m, 0.4);
  for (size_t k = 0; k < scan.radii.size(); ++k) {
    double off = arc_distance(m, scan.argmax_center[k], 128);
    INFO("radius " << scan.radii[k] << " argmax " << scan.argmax_center[k]);
    REQUIRE(off <= scan.radii[k] * (1.0 + 1e-12));
  }
  // the bump ratio genuinely exceeds the flat background value 4 rho^4
  REQUIRE(scan.max_ratio[0] > 4.0 * std::pow(0.4, 4.0) * 1.5);
}
