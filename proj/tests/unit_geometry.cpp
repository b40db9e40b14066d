#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "support/oracles.hpp"
#include "warplab/curvature.hpp"
#include "warplab/metric.hpp"
#include "warplab/operators.hpp"
#include "warplab/rng.hpp"
#include "warplab/tube.hpp"

using namespace warplab;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

namespace {

double rate(double coarse, double fine) { return std::log2(coarse / fine); }

WarpedMetric mild_metric(int n, uint64_t seed) {
  Rng rng(seed);
  return random_mild_metric(Grid::make(n, two_pi), rng);
}

struct OracleGap {
  double worst = 0.0;
  double offplane = 0.0;
  double ric_offdiag = 0.0;
  double split = 0.0;
};

OracleGap oracle_gap(const WarpedMetric& m) {
  CurvatureField c = curvature(m);
  OracleGap g;
  for (int i = 0; i < m.n(); ++i) {
    oracle::Curvature o = oracle::curvature_at(m, i);
    for (double d : {o.k_rtheta - c.k_rtheta[i], o.k_rs - c.k_rs[i], o.k_thetas - c.k_thetas[i],
                     o.k_ss - c.k_ss[i], o.ric_r - c.ric_r[i], o.ric_theta - c.ric_theta[i],
                     o.ric_s - c.ric_s[i], o.riem_norm_sq - c.riem_norm_sq[i],
                     o.scalar - c.scalar[i]})
      g.worst = std::max(g.worst, std::abs(d));
    g.offplane = std::max(g.offplane, o.max_offplane);
    g.ric_offdiag = std::max(g.ric_offdiag, o.max_ric_offdiag);
    g.split = std::max(g.split, o.sectional_split);
  }
  return g;
}

}  // namespace

TEST_CASE("grid wrap and validation", "[grid]") {
  Grid g = Grid::make(32, two_pi);
  REQUIRE(g.wrap(-1) == 31);
  REQUIRE(g.wrap(32) == 0);
  REQUIRE(g.wrap(-33) == 31);
  REQUIRE(g.coord(8) == Approx(two_pi / 4.0));
  REQUIRE_THROWS_WITH(Grid::make(8, 1.0), ContainsSubstring("at least 16"));
  REQUIRE_THROWS_AS(Grid::make(32, -1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(Grid::make(32, 0.0), std::invalid_argument);
}

TEST_CASE("metric validation reports the offending warp and index", "[metric]") {
  WarpedMetric m = build_metric(FlatProduct{}, Grid::make(16, 1.0));
  m.b[3] = 0.0;
  REQUIRE_THROWS_WITH(validate_metric(m), ContainsSubstring("warp b nonpositive at index 3"));
  m.b[3] = 1.0;
  m.a.pop_back();
  REQUIRE_THROWS_WITH(validate_metric(m), ContainsSubstring("match the grid size"));
}

TEST_CASE("arclength doubles when w doubles", "[metric]") {
  Grid g = Grid::make(64, two_pi);
  WarpedMetric flat = build_metric(FlatProduct{}, g);
  REQUIRE(flat.total_arclength() == Approx(two_pi).epsilon(1e-13));
  WarpedMetric stretched = flat;
  for (double& x : stretched.w) x = 2.0;
  REQUIRE(stretched.total_arclength() == Approx(2.0 * two_pi).epsilon(1e-13));
}

TEST_CASE("rescaling multiplies arclength and clocks parabolically", "[metric]") {
  WarpedMetric m = mild_metric(64, 7);
  m.time = 0.25;
  WarpedMetric r = rescale_metric(m, 3.0);
  REQUIRE(r.total_arclength() == Approx(3.0 * m.total_arclength()).epsilon(1e-13));
  REQUIRE(r.time == Approx(9.0 * 0.25));
  REQUIRE_THROWS_AS(rescale_metric(m, 0.0), std::invalid_argument);
}

TEST_CASE("bump profile dips by height*width^2 at the center", "[metric]") {
  Grid g = Grid::make(256, two_pi);
  BumpProfile p;
  p.center = g.coord(128);
  p.height = 2.0;
  p.width = 0.3;
  WarpedMetric m = build_metric(p, g);
  REQUIRE(m.b[128] == Approx(1.0 - 2.0 * 0.09).epsilon(1e-12));
  REQUIRE(m.b[0] == Approx(1.0).epsilon(1e-6));  // envelope dies off across the circle
  // envelope is symmetric about the center
  REQUIRE(m.b[100] == Approx(m.b[156]).epsilon(1e-12));
}

TEST_CASE("first and second arclength derivatives converge at order two", "[operators]") {
  auto field_err = [](int n) {
    Grid g = Grid::make(n, two_pi);
    WarpedMetric m = build_metric(FlatProduct{}, g);
    std::vector<double> f(static_cast<size_t>(n)), d1(static_cast<size_t>(n)),
        d2(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      double s = g.coord(i);
      f[static_cast<size_t>(i)] = std::sin(2.0 * s) + 0.3 * std::cos(3.0 * s);
      d1[static_cast<size_t>(i)] = 2.0 * std::cos(2.0 * s) - 0.9 * std::sin(3.0 * s);
      d2[static_cast<size_t>(i)] = -4.0 * std::sin(2.0 * s) - 2.7 * std::cos(3.0 * s);
    }
    std::vector<double> g1 = deriv1_arc(m, f), g2 = deriv2_arc(m, f);
    double e1 = 0.0, e2 = 0.0;
    for (int i = 0; i < n; ++i) {
      e1 = std::max(e1, std::abs(g1[static_cast<size_t>(i)] - d1[static_cast<size_t>(i)]));
      e2 = std::max(e2, std::abs(g2[static_cast<size_t>(i)] - d2[static_cast<size_t>(i)]));
    }
    return std::pair{e1, e2};
  };
  auto [c1, c2] = field_err(128);
  auto [f1, f2] = field_err(256);
  REQUIRE(rate(c1, f1) > 1.9);
  REQUIRE(rate(c2, f2) > 1.9);
}

TEST_CASE("arclength derivative scales inversely with w", "[operators]") {
  Grid g = Grid::make(64, two_pi);
  WarpedMetric m = build_metric(FlatProduct{}, g);
  std::vector<double> f(64);
  for (int i = 0; i < 64; ++i) f[static_cast<size_t>(i)] = std::sin(g.coord(i));
  std::vector<double> d_unit = deriv1_arc(m, f);
  for (double& x : m.w) x = 2.0;
  std::vector<double> d_double = deriv1_arc(m, f);
  for (int i = 0; i < 64; ++i)
    REQUIRE(d_double[static_cast<size_t>(i)] ==
            Approx(0.5 * d_unit[static_cast<size_t>(i)]).margin(1e-15));
}

TEST_CASE("flat product volume matches the closed form", "[operators]") {
  double a0 = 0.7, b0 = 1.3, len = two_pi;
  WarpedMetric m = build_metric(FlatProduct{a0, b0}, Grid::make(128, len));
  double expected = eight_pi_sq * a0 * b0 * b0 * len;
  REQUIRE(integral(m) == Approx(expected).epsilon(1e-12));
  REQUIRE(volume(m) == Approx(expected).epsilon(1e-12));
  std::vector<double> c(128, 2.5);
  REQUIRE(lp_norm(m, c, 3.0) == Approx(2.5 * std::pow(expected, 1.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("laplacian is exactly self-adjoint for the volume quadrature", "[operators]") {
  WarpedMetric m = mild_metric(96, 11);
  Rng rng(5);
  std::vector<double> f(96), h(96);
  for (int i = 0; i < 96; ++i) {
    f[static_cast<size_t>(i)] = rng.uniform(-1.0, 1.0);
    h[static_cast<size_t>(i)] = rng.uniform(-1.0, 1.0);
  }
  std::vector<double> lf = laplacian_radial(m, f), lh = laplacian_radial(m, h);
  std::vector<double> mu = node_measure(m);
  double lhs = 0.0, rhs = 0.0, scale = 0.0;
  for (int i = 0; i < 96; ++i) {
    lhs += lf[static_cast<size_t>(i)] * h[static_cast<size_t>(i)] * mu[static_cast<size_t>(i)];
    rhs += f[static_cast<size_t>(i)] * lh[static_cast<size_t>(i)] * mu[static_cast<size_t>(i)];
    scale += std::abs(lf[static_cast<size_t>(i)] * h[static_cast<size_t>(i)]) *
             mu[static_cast<size_t>(i)];
  }
  REQUIRE(std::abs(lhs - rhs) <= 1e-12 * scale);
  // and the dirichlet energy is the associated quadratic form
  double energy = dirichlet_energy(m, f);
  double pairing = 0.0;
  for (int i = 0; i < 96; ++i)
    pairing -= f[static_cast<size_t>(i)] * lf[static_cast<size_t>(i)] * mu[static_cast<size_t>(i)];
  REQUIRE(energy == Approx(pairing).epsilon(1e-12));
}

TEST_CASE("laplacian eigenfunction identity on the flat product", "[operators]") {
  int n = 256;
  Grid g = Grid::make(n, two_pi);
  WarpedMetric m = build_metric(FlatProduct{}, g);
  std::vector<double> f(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) f[static_cast<size_t>(i)] = std::sin(g.coord(i));
  std::vector<double> lap = laplacian_radial(m, f);
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    worst = std::max(worst, std::abs(lap[static_cast<size_t>(i)] + f[static_cast<size_t>(i)]));
  REQUIRE(worst < 1e-3);
}

TEST_CASE("curvature of the flat product is the sphere block alone", "[curvature]") {
  double a0 = 0.5, b0 = 2.0;
  WarpedMetric m = build_metric(FlatProduct{a0, b0}, Grid::make(64, two_pi));
  CurvatureField c = curvature(m);
  double kss = 1.0 / (b0 * b0);
  for (int i = 0; i < 64; ++i) {
    REQUIRE(c.k_rtheta[i] == 0.0);
    REQUIRE(c.k_rs[i] == 0.0);
    REQUIRE(c.k_thetas[i] == 0.0);
    REQUIRE(c.k_ss[i] == Approx(kss).epsilon(1e-15));
    REQUIRE(c.ric_r[i] == 0.0);
    REQUIRE(c.ric_theta[i] == 0.0);
    REQUIRE(c.ric_s[i] == Approx(kss).epsilon(1e-15));
    REQUIRE(c.scalar[i] == Approx(2.0 * kss).epsilon(1e-15));
    REQUIRE(c.riem_norm_sq[i] == Approx(4.0 * kss * kss).epsilon(1e-15));
  }
  REQUIRE(c.sup_rm() == Approx(2.0 * kss).epsilon(1e-15));
  REQUIRE(c.sup_ric() == Approx(kss).epsilon(1e-15));
}

TEST_CASE("curvature trace identity holds to roundoff", "[curvature]") {
  WarpedMetric m = mild_metric(128, 23);
  CurvatureField c = curvature(m);
  for (int i = 0; i < m.n(); ++i) {
    double tr = c.ric_r[i] + c.ric_theta[i] + 2.0 * c.ric_s[i];
    REQUIRE(c.scalar[i] == Approx(tr).margin(1e-12 * (1.0 + std::abs(tr))));
  }
}

TEST_CASE("curvature scales as 1/lambda^2 under rescaling", "[curvature]") {
  WarpedMetric m = mild_metric(96, 31);
  CurvatureField c = curvature(m);
  CurvatureField c2 = curvature(rescale_metric(m, 2.0));
  for (int i = 0; i < m.n(); ++i) {
    REQUIRE(c2.k_ss[i] == c.k_ss[i] / 4.0);  // powers of two stay exact
    REQUIRE(c2.ric_r[i] == c.ric_r[i] / 4.0);
  }
  CurvatureField c3 = curvature(rescale_metric(m, 3.0));
  for (int i = 0; i < m.n(); ++i)
    REQUIRE(c3.scalar[i] == Approx(c.scalar[i] / 9.0).margin(1e-13));
}

TEST_CASE("curvature agrees with the christoffel oracle at second order", "[curvature][oracle]") {
  for (uint64_t seed : {101ull, 202ull}) {
    double e128 = oracle_gap(mild_metric(128, seed)).worst;
    double e256 = oracle_gap(mild_metric(256, seed)).worst;
    double e512 = oracle_gap(mild_metric(512, seed)).worst;
    INFO("seed " << seed << " errors " << e128 << " " << e256 << " " << e512);
    REQUIRE(rate(e128, e256) > 1.9);
    REQUIRE(rate(e256, e512) > 1.9);
  }
}

TEST_CASE("oracle confirms the plane structure of the ansatz", "[curvature][oracle]") {
  OracleGap g = oracle_gap(mild_metric(256, 77));
  REQUIRE(g.offplane < 1e-5);
  REQUIRE(g.ric_offdiag < 1e-5);
  REQUIRE(g.split < 1e-5);
}

TEST_CASE("arc distance is symmetric and bounded by half the circle", "[tube]") {
  WarpedMetric m = mild_metric(64, 13);
  double half = 0.5 * m.total_arclength();
  for (int j : {1, 7, 20, 33, 50, 63}) {
    double d = arc_distance(m, 5, j);
    REQUIRE(d == Approx(arc_distance(m, j, 5)).margin(1e-12));
    REQUIRE(d <= half * (1.0 + 1e-12));
  }
  REQUIRE(arc_distance(m, 9, 9) == 0.0);
}

TEST_CASE("tube membership follows the closed arclength ball", "[tube]") {
  // exact-dyadic spacing so cumulative distances carry no rounding
  Grid g = Grid::make(128, 32.0);
  WarpedMetric m = build_metric(FlatProduct{}, g);
  REQUIRE(m.ds() == 0.25);
  Tube t = tube_at(m, 10, 1.25);  // exactly five node steps each side
  REQUIRE(t.count == 11);
  REQUIRE(m.grid.wrap(t.first) == 5);
  Tube tiny = tube_at(m, 10, 0.2);  // below one node step
  REQUIRE(tiny.count == 1);
  REQUIRE(m.grid.wrap(tiny.first) == 10);
  REQUIRE_THROWS_AS(tube_at(m, 0, 17.0), std::invalid_argument);  // beyond half the circle
  REQUIRE_THROWS_AS(tube_at(m, 0, -1.0), std::invalid_argument);
}

TEST_CASE("tube quadrature matches the flat window", "[tube]") {
  double a0 = 0.8, b0 = 1.1;
  Grid g = Grid::make(128, 32.0);
  WarpedMetric m = build_metric(FlatProduct{a0, b0}, g);
  Tube t = tube_at(m, 40, 1.25);
  // trapezoid over 11 nodes with half end weights spans exactly 10 cells
  double expected = eight_pi_sq * a0 * b0 * b0 * 10.0 * 0.25;
  REQUIRE(volume(m, t).value == Approx(expected).epsilon(1e-12));
  // windowed curvature is |Rm|^2 = 4/b0^4 times the window volume
  REQUIRE(l2_curvature(m, t) == Approx(4.0 / std::pow(b0, 4.0) * expected).epsilon(1e-12));
}

TEST_CASE("whole-circle tube degenerates to the full integral", "[tube]") {
  WarpedMetric m = mild_metric(64, 3);
  double half = 0.5 * m.total_arclength();
  Tube t = tube_at(m, 12, half * (1.0 - 1e-13));
  REQUIRE(t.whole);
  REQUIRE(t.count == 64);
  REQUIRE(volume(m, t).value == Approx(volume(m)).epsilon(1e-12));
}

TEST_CASE("fiber diameter tracks the largest fiber in the tube", "[tube]") {
  Grid g = Grid::make(64, two_pi);
  WarpedMetric m = build_metric(FlatProduct{0.3, 1.0}, g);
  m.b[20] = 1.5;  // widen one sphere fiber inside the tube
  Tube t = tube_at(m, 20, 0.5);
  REQUIRE(t.fiber_diameter == Approx(pi * 1.5).epsilon(1e-12));
  Tube away = tube_at(m, 52, 0.5);
  REQUIRE(away.fiber_diameter == Approx(pi * 1.0).epsilon(1e-12));
}
