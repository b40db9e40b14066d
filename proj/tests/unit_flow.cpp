#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "warplab/flow.hpp"
#include "warplab/metric.hpp"
#include "warplab/rng.hpp"

using namespace warplab;
using Catch::Approx;

namespace {

WarpedMetric bump_metric(int n, double height = 0.8, double width = 0.5) {
  Grid g = Grid::make(n, two_pi);
  BumpProfile p;
  p.center = pi;
  p.height = height;
  p.width = width;
  return build_metric(p, g);
}

}  // namespace

TEST_CASE("flow velocity is minus warp times the ricci eigenvalue", "[flow]") {
  Rng rng(17);
  WarpedMetric m = random_mild_metric(Grid::make(128, two_pi), rng);
  FlowRhs r = flow_rhs(m);
  CurvatureField c = curvature(m);
  for (int i = 0; i < m.n(); ++i) {
    REQUIRE(r.dw[i] == Approx(-m.w[i] * c.ric_r[i]).epsilon(1e-12).margin(1e-14));
    REQUIRE(r.da[i] == Approx(-m.a[i] * c.ric_theta[i]).epsilon(1e-12).margin(1e-14));
    REQUIRE(r.db[i] == Approx(-m.b[i] * c.ric_s[i]).epsilon(1e-12).margin(1e-14));
  }
}

TEST_CASE("cfl step obeys the diffusive bound and the curvature cap", "[flow]") {
  // diffusive regime: flat, unit sphere radius
  WarpedMetric m = build_metric(FlatProduct{}, Grid::make(256, two_pi));
  double ds = m.ds();
  REQUIRE(cfl_dt(m, 1.0) == Approx(ds * ds / 4.0).epsilon(1e-13));
  REQUIRE(cfl_dt(m, 0.8) == Approx(0.8 * ds * ds / 4.0).epsilon(1e-13));

  // curvature regime: tiny sphere on a coarse grid, sup |Rm| = 2/b0^2
  WarpedMetric hot = build_metric(FlatProduct{1.0, 0.05}, Grid::make(16, two_pi));
  double cap = 1.0 / (1.0 + 2.0 / (0.05 * 0.05));
  REQUIRE(cfl_dt(hot, 1.0) == Approx(cap).epsilon(1e-13));
  REQUIRE_THROWS_AS(cfl_dt(m, 0.0), std::invalid_argument);
}

TEST_CASE("round sphere factor shrinks as b^2 = b0^2 - 2t", "[flow]") {
  WarpedMetric m0 = build_metric(FlatProduct{}, Grid::make(128, two_pi));
  FlowControls fc;
  fc.t_end = 0.2;
  for (int k = 1; k <= 8; ++k) fc.snapshot_times.push_back(0.025 * k);
  FlowResult res = run_flow(m0, fc);
  REQUIRE(res.report.stop_reason == StopReason::reached_t_end);
  for (const WarpedMetric& snap : res.trajectory.snapshots) {
    double expected = 1.0 - 2.0 * snap.time;
    for (int i = 0; i < snap.n(); ++i)
      REQUIRE(snap.b[i] * snap.b[i] == Approx(expected).epsilon(1e-6));
    // a and w are stationary on the exact product
    REQUIRE(snap.a[0] == 1.0);
    REQUIRE(snap.w[0] == 1.0);
  }
  double v0 = volume(res.trajectory.snapshots.front());
  double v1 = volume(res.trajectory.snapshots.back());
  REQUIRE(v1 / v0 == Approx(1.0 - 2.0 * res.report.t_final).epsilon(1e-6));
}

TEST_CASE("parabolic rescaling commutes with the flow bitwise for lambda 2", "[flow]") {
  WarpedMetric g0 = bump_metric(64);
  double lam = 2.0;
  FlowControls fc;
  fc.t_end = 5e-3;
  fc.fixed_dt = 1e-4;
  fc.snapshot_times = {1e-3, 2.5e-3};
  FlowControls fc2 = fc;
  fc2.t_end = fc.t_end * lam * lam;
  fc2.fixed_dt = *fc.fixed_dt * lam * lam;
  fc2.snapshot_times = {1e-3 * lam * lam, 2.5e-3 * lam * lam};

  FlowResult base = run_flow(g0, fc);
  FlowResult scaled = run_flow(rescale_metric(g0, lam), fc2);
  REQUIRE(base.report.steps == scaled.report.steps);
  REQUIRE(base.trajectory.snapshots.size() == scaled.trajectory.snapshots.size());
  const WarpedMetric& mb = base.trajectory.snapshots.back();
  const WarpedMetric& ms = scaled.trajectory.snapshots.back();
  for (int i = 0; i < mb.n(); ++i) {
    REQUIRE(ms.w[i] == lam * mb.w[i]);
    REQUIRE(ms.a[i] == lam * mb.a[i]);
    REQUIRE(ms.b[i] == lam * mb.b[i]);
  }
}

TEST_CASE("rescaling covariance holds to rounding for lambda 10", "[flow]") {
  WarpedMetric g0 = bump_metric(64);
  double lam = 10.0;
  FlowControls fc;
  fc.t_end = 4e-3;
  fc.fixed_dt = 1e-4;
  FlowControls fc2 = fc;
  fc2.t_end = fc.t_end * lam * lam;
  fc2.fixed_dt = *fc.fixed_dt * lam * lam;
  FlowResult base = run_flow(g0, fc);
  FlowResult scaled = run_flow(rescale_metric(g0, lam), fc2);
  const WarpedMetric& mb = base.trajectory.snapshots.back();
  const WarpedMetric& ms = scaled.trajectory.snapshots.back();
  for (int i = 0; i < mb.n(); ++i) {
    REQUIRE(ms.w[i] == Approx(lam * mb.w[i]).epsilon(1e-10));
    REQUIRE(ms.b[i] == Approx(lam * mb.b[i]).epsilon(1e-10));
  }
}

TEST_CASE("theta fiber size never enters the w and b dynamics", "[flow]") {
  // two metrics differing only by a constant theta warp evolve identically
  WarpedMetric g1 = bump_metric(64);
  WarpedMetric g2 = g1;
  for (double& x : g2.a) x = 0.01;
  FlowControls fc;
  fc.t_end = 0.02;
  FlowResult r1 = run_flow(g1, fc);
  FlowResult r2 = run_flow(g2, fc);
  REQUIRE(r1.report.steps == r2.report.steps);
  REQUIRE(r1.report.t_final == r2.report.t_final);
  const WarpedMetric& m1 = r1.trajectory.snapshots.back();
  const WarpedMetric& m2 = r2.trajectory.snapshots.back();
  for (int i = 0; i < m1.n(); ++i) {
    REQUIRE(m2.w[i] == m1.w[i]);
    REQUIRE(m2.b[i] == m1.b[i]);
    REQUIRE(m2.a[i] == 0.01);  // constant theta warp is exactly stationary
    REQUIRE(m1.a[i] == 1.0);
  }
}

TEST_CASE("volume element obeys its evolution identity along the flow", "[flow]") {
  WarpedMetric g0 = bump_metric(128, 0.6, 0.5);
  auto residual_at = [&](double spacing) {
    FlowControls fc;
    fc.t_end = 0.008;
    fc.fixed_dt = 1e-4;
    for (double t = spacing; t < fc.t_end + 1e-12; t += spacing) fc.snapshot_times.push_back(t);
    FlowResult res = run_flow(g0, fc);
    REQUIRE(res.report.stop_reason == StopReason::reached_t_end);
    return dvol_residual(res.trajectory);
  };
  double coarse = residual_at(2e-3);
  double fine = residual_at(1e-3);
  REQUIRE(coarse < 1e-3);
  REQUIRE(coarse / fine > 3.5);  // second order in the snapshot spacing
}

TEST_CASE("equivalence tracker stops the round collapse at ratio two", "[flow]") {
  WarpedMetric m0 = build_metric(FlatProduct{}, Grid::make(64, two_pi));
  FlowControls fc;
  fc.t_end = 0.45;  // beyond the ratio-2 time (1 - 2t)^{-1/2} = 2 at t = 0.375
  FlowResult res = run_flow(m0, fc);
  REQUIRE(res.report.stop_reason == StopReason::equivalence_violated);
  REQUIRE(res.report.t_final > 0.370);
  REQUIRE(res.report.t_final < 0.381);
  REQUIRE(res.report.max_equiv_ratio > 2.0);
  REQUIRE(res.report.max_equiv_ratio < 2.05);
}

TEST_CASE("positivity loss rejects the step and stops the run honestly", "[flow]") {
  WarpedMetric m0 = build_metric(FlatProduct{}, Grid::make(16, two_pi));
  StepResult sr = flow_step(m0, 1.0);  // db = -1 everywhere, midpoint overshoots zero
  REQUIRE(!sr.accepted);
  REQUIRE(sr.bad_index >= 0);
  REQUIRE(sr.metric.b[0] == 1.0);  // input untouched

  FlowControls fc;
  fc.t_end = 2.0;
  fc.fixed_dt = 1.0;
  FlowResult res = run_flow(m0, fc);
  REQUIRE(res.report.stop_reason == StopReason::nonfinite_state);
  REQUIRE(res.report.steps == 0);
  REQUIRE(res.report.t_final == 0.0);
}

TEST_CASE("step limit is reported as such", "[flow]") {
  WarpedMetric m0 = build_metric(FlatProduct{}, Grid::make(64, two_pi));
  FlowControls fc;
  fc.t_end = 0.1;
  fc.max_steps = 5;
  FlowResult res = run_flow(m0, fc);
  REQUIRE(res.report.stop_reason == StopReason::step_limit);
  REQUIRE(res.report.steps == 5);
}

TEST_CASE("requested snapshot times are landed on exactly", "[flow]") {
  WarpedMetric m0 = bump_metric(64);
  FlowControls fc;
  fc.t_end = 0.01;
  fc.snapshot_times = {0.002, 0.004, 0.0075};
  FlowResult res = run_flow(m0, fc);
  REQUIRE(res.trajectory.snapshots.size() == 5);  // initial, three requests, final
  REQUIRE(res.trajectory.snapshots[0].time == 0.0);
  REQUIRE(res.trajectory.snapshots[1].time == Approx(0.002).margin(1e-12));
  REQUIRE(res.trajectory.snapshots[2].time == Approx(0.004).margin(1e-12));
  REQUIRE(res.trajectory.snapshots[3].time == Approx(0.0075).margin(1e-12));
  REQUIRE(res.trajectory.snapshots[4].time == Approx(0.01).margin(1e-12));
}

TEST_CASE("tracker series brackets the run and weights the window", "[flow]") {
  WarpedMetric m0 = bump_metric(64);
  FlowControls fc;
  fc.t_end = 0.01;
  fc.snapshot_times = {1e-4, 5e-3};
  FlowResult res = run_flow(m0, fc);
  const BoundReport& rep = res.report;
  REQUIRE(rep.t1 == Approx(1e-4));
  REQUIRE(!rep.series.empty());
  REQUIRE(rep.series.front().t == 0.0);
  REQUIRE(rep.series.back().t == Approx(rep.t_final).margin(1e-12));
  double windowed = 0.0, anywhere = 0.0;
  for (const TrackerSample& s : rep.series) {
    anywhere = std::max(anywhere, s.t_sup_rm);
    if (s.t >= rep.t1) windowed = std::max(windowed, s.t_sup_rm);
  }
  REQUIRE(rep.max_t_sup_rm == Approx(windowed));
  REQUIRE(windowed <= anywhere * (1.0 + 1e-12));
}

TEST_CASE("equivalence ratio measures the worst warp factor both ways", "[flow]") {
  WarpedMetric g0 = build_metric(FlatProduct{}, Grid::make(16, two_pi));
  WarpedMetric m = g0;
  m.b[4] = 1.6;
  REQUIRE(equivalence_ratio(m, g0) == Approx(1.6));
  m.b[4] = 0.5;
  REQUIRE(equivalence_ratio(m, g0) == Approx(2.0));
  REQUIRE(equivalence_ratio(g0, g0) == 1.0);
}
