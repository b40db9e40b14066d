#pragma once

// Quantitative Moser-iteration machinery for nonnegative solutions of
// df/dt <= Delta f + u f under the potential budget
// (int u^3 dV)^(1/3) <= mu t^(-1/3) and a tube Sobolev inequality
// ||f||_4^2 <= A ||grad f||_2^2.
//
// Constants table (all constructive, no asymptotic shortcuts):
//   C_p      = 2 max(p + c, p^2/(p-1), 1 + 1/(p-1)^2)   (c = volume-rate
//              constant, 0 on a static background)
//   Chat(t)  = C_p mu^3 A^2 / t
//   cutoff   quintic annulus profile with |grad chi| <= (15/8)/(r-r') < 2/(r-r')
//   C1       = 16 C_p   (gradient-term constant in the level bound; the 16
//              covers |grad chi|^2 <= 4/(r-r')^2 with headroom for metric
//              drift and for the p/(p-1) factor of the chaining step)
//   kernel   A^(2/p0) ((1 + A^2 mu^3) / t + 1/r^2)^(3/p0) * energy^(1/p0)
//
// Every check below evaluates both sides of its inequality with the grid's
// own self-adjoint quadratures and reports the signed gap; nothing is
// asserted here, the callers decide what a violation means.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "warplab/cutoff.hpp"
#include "warplab/heat.hpp"
#include "warplab/operators.hpp"
#include "warplab/tube.hpp"

namespace warplab {

inline double moser_cp(double p, double c = 0.0) {
  if (!(p > 1.0)) throw std::invalid_argument("moser_cp: need p > 1");
  double q = p - 1.0;
  return 2.0 * std::max({p + c, p * p / q, 1.0 + 1.0 / (q * q)});
}

inline double moser_chat(double p, double mu, double A, double t, double c = 0.0) {
  if (!(t > 0.0)) throw std::invalid_argument("moser_chat: need t > 0");
  return moser_cp(p, c) * mu * mu * mu * A * A / t;
}

inline constexpr double lemma4_c1_factor = 16.0;

namespace detail {
// x^e with the tiny floor applied only when the exponent is below 1, per the
// integrand convention 0 * finite = 0
inline double pow_floor(double x, double e) {
  if (e < 1.0) return std::pow(std::max(x, 1e-300), e);
  return std::pow(x, e);
}

inline std::vector<double> pow_field(const std::vector<double>& f, double e) {
  std::vector<double> out(f.size());
  for (size_t i = 0; i < f.size(); ++i) out[i] = pow_floor(f[i], e);
  return out;
}
}  // namespace detail

struct Lemma1Result {
  double lhs = 0.0;    // int |grad(chi f^{p/2})|^2 dV
  double rhs = 0.0;    // (p^2/(2(p-1))) int chi^2 f^{p-1} (-Delta f) + (1 + 1/(p-1)^2) int |grad chi|^2 f^p
  double gap = 0.0;    // rhs - lhs, expected >= 0 up to quadrature tolerance
  bool zero_flag = false;  // f hit zero with p < 2 (integrand convention applied)
};

inline Lemma1Result lemma1_gap(const WarpedMetric& m, const std::vector<double>& f,
                               const std::vector<double>& chi, double p) {
  if (!(p > 1.0)) throw std::invalid_argument("lemma1_gap: need p > 1");
  int n = m.n();
  if (static_cast<int>(f.size()) != n || static_cast<int>(chi.size()) != n)
    throw std::invalid_argument("lemma1_gap: field sizes must match the grid");
  for (int i = 0; i < n; ++i)
    if (!(f[i] >= 0.0)) throw std::invalid_argument("lemma1_gap: f must be nonnegative");

  Lemma1Result res;
  if (p < 2.0)
    for (double x : f)
      if (x == 0.0) res.zero_flag = true;

  std::vector<double> u(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) u[i] = chi[i] * detail::pow_floor(f[i], 0.5 * p);
  res.lhs = dirichlet_energy(m, u);

  std::vector<double> lap = laplacian_radial(m, f);
  std::vector<double> mu = node_measure(m);
  double first = 0.0;
  for (int i = 0; i < n; ++i) {
    double fp1 = detail::pow_floor(f[i], p - 1.0);
    double term = (f[i] == 0.0) ? 0.0 : chi[i] * chi[i] * fp1 * (-lap[i]);
    first += term * mu[i];
  }
  double q = p - 1.0;
  std::vector<double> fp = detail::pow_field(f, p);
  res.rhs = (p * p / (2.0 * q)) * first + (1.0 + 1.0 / (q * q)) * gradsq_weighted(m, chi, fp);
  res.gap = res.rhs - res.lhs;
  return res;
}

struct EnergyStepResult {
  double residual = 0.0;  // expected <= 0 up to tolerance when the budget holds
  double ddt_energy = 0.0;
  double grad_term = 0.0;
  double cutoff_term = 0.0;
  double chat_term = 0.0;
};

// Differential energy inequality at one stored sample:
//   d/dt int chi^2 f^p + ((p-1)/p) int |grad(chi f^{p/2})|^2
//     <= C_p int |grad chi|^2 f^p + Chat(t) int chi^2 f^p
// with d/dt evaluated through the semi-discrete equation itself.
inline EnergyStepResult energy_step_check(const HeatProblem& hp, const HeatSeries& series,
                                          const std::vector<double>& chi, double p,
                                          size_t sample_index) {
  if (sample_index >= series.times.size())
    throw std::invalid_argument("energy_step_check: sample index out of range");
  double t = series.times[sample_index];
  if (!(t > 0.0)) throw std::invalid_argument("energy_step_check: need a positive sample time");
  const WarpedMetric& m = hp.metric;
  const std::vector<double>& f = series.frames[sample_index];
  int n = m.n();

  std::vector<double> lap = laplacian_radial(m, f);
  std::vector<double> mu = node_measure(m);
  std::vector<double> fp = detail::pow_field(f, p);

  EnergyStepResult r;
  double energy = 0.0;
  for (int i = 0; i < n; ++i) {
    double fp1 = (f[i] == 0.0) ? 0.0 : detail::pow_floor(f[i], p - 1.0);
    r.ddt_energy += chi[i] * chi[i] * p * fp1 * (lap[i] + hp.u[i] * f[i]) * mu[i];
    energy += chi[i] * chi[i] * fp[i] * mu[i];
  }
  std::vector<double> v(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) v[i] = chi[i] * detail::pow_floor(f[i], 0.5 * p);
  r.grad_term = (p - 1.0) / p * dirichlet_energy(m, v);
  r.cutoff_term = moser_cp(p) * gradsq_weighted(m, chi, fp);
  r.chat_term = moser_chat(p, hp.mu, hp.sobolev_A, t) * energy;
  r.residual = r.ddt_energy + r.grad_term - r.cutoff_term - r.chat_term;
  return r;
}

// H(p, tau, r) = int_tau^T int_{T_r} f^p dV dt, trapezoid in time over the
// stored samples with linear interpolation at tau
inline double h_functional(const WarpedMetric& m, const HeatSeries& series, double p, double tau,
                           const Tube& tube) {
  if (series.times.size() < 2) throw std::invalid_argument("h_functional: need >= 2 samples");
  double T = series.times.back();
  if (!(tau >= 0.0) || !(tau < T))
    throw std::invalid_argument("h_functional: need 0 <= tau < T");

  std::vector<double> space(series.times.size());
  for (size_t k = 0; k < series.times.size(); ++k)
    space[k] = tube_integral(m, tube, detail::pow_field(series.frames[k], p)).value;

  double total = 0.0;
  for (size_t k = 0; k + 1 < series.times.size(); ++k) {
    double t0 = series.times[k], t1 = series.times[k + 1];
    if (t1 <= tau) continue;
    double lo = std::max(t0, tau);
    double i0 = space[k], i1 = space[k + 1];
    if (lo > t0) {
      double theta = (lo - t0) / (t1 - t0);
      i0 = (1.0 - theta) * space[k] + theta * space[k + 1];
    }
    total += 0.5 * (i0 + i1) * (t1 - lo);
  }
  return total;
}

struct Lemma4Result {
  double lhs = 0.0;  // H(1.5 p, tau', r')
  double rhs = 0.0;  // A (Chat(tau') + 1/(tau'-tau) + C1/(r-r')^2)^(3/2) H(p, tau, r)^(3/2)
  double margin = 0.0;  // rhs - lhs
};

inline Lemma4Result lemma4_check(const WarpedMetric& m, const HeatSeries& series, double p,
                                 double tau, double tau_prime, double r, double r_prime,
                                 double A, double mu, int center) {
  double max_w = *std::max_element(m.w.begin(), m.w.end());
  if (!(tau_prime > tau + 1e-12))
    throw std::invalid_argument("lemma4_check: degenerate time window");
  if (!(r > r_prime + 2.0 * m.ds() * max_w))
    throw std::invalid_argument("lemma4_check: degenerate annulus");

  Lemma4Result res;
  res.lhs = h_functional(m, series, 1.5 * p, tau_prime, tube_at(m, center, r_prime));
  double chat = moser_chat(p, mu, A, tau_prime);
  double c1 = lemma4_c1_factor * moser_cp(p);
  double bracket = chat + 1.0 / (tau_prime - tau) + c1 / ((r - r_prime) * (r - r_prime));
  double h = h_functional(m, series, p, tau, tube_at(m, center, r));
  res.rhs = A * std::pow(bracket, 1.5) * std::pow(h, 1.5);
  res.margin = res.rhs - res.lhs;
  return res;
}

// Iteration ladder p_k = p0 nu^k, tau_k = t (1 - nu^(-k-1)), r_k = (r/2)(1 + nu^(-k/2))
struct MoserSchedule {
  struct Rung {
    double p = 0.0, tau = 0.0, r = 0.0;
  };
  double p0 = 0.0, t = 0.0, r = 0.0;
  double nu = 1.5;
  std::vector<Rung> rungs;
  std::vector<double> sigma;        // partial sums of nu^-k, bounded by 3
  std::vector<double> sigma_prime;  // partial sums of k nu^-k, bounded by 6
};

inline MoserSchedule moser_schedule(double p0, double t, double r, int k_max) {
  if (!(p0 > 1.0) || !(t > 0.0) || !(r > 0.0) || k_max < 0)
    throw std::invalid_argument("moser_schedule: bad parameters");
  MoserSchedule s;
  s.p0 = p0;
  s.t = t;
  s.r = r;
  double run = 0.0, run_prime = 0.0;
  for (int k = 0; k <= k_max; ++k) {
    MoserSchedule::Rung rung;
    rung.p = p0 * std::pow(s.nu, k);
    rung.tau = t * (1.0 - std::pow(s.nu, -(k + 1)));
    rung.r = 0.5 * r * (1.0 + std::pow(s.nu, -0.5 * k));
    s.rungs.push_back(rung);
    run += std::pow(s.nu, -k);
    run_prime += k * std::pow(s.nu, -k);
    s.sigma.push_back(run);
    s.sigma_prime.push_back(run_prime);
  }
  return s;
}

// closed-form level bound the iteration converges to:
//   sup_{B_{r/2} x [t, T]} f <= A^(2/p0) ((1 + A^2 mu^3)/t + 1/r^2)^(3/p0) energy^(1/p0)
// up to the calibrated multiplicative constant C*
inline double sup_bound_kernel(double A, double mu, double p0, double t, double r,
                               double energy) {
  if (!(t > 0.0) || !(r > 0.0) || !(p0 > 1.0) || !(A > 0.0) || !(energy >= 0.0))
    throw std::invalid_argument("sup_bound_kernel: bad parameters");
  double bracket = (1.0 + A * A * mu * mu * mu) / t + 1.0 / (r * r);
  return std::pow(A, 2.0 / p0) * std::pow(bracket, 3.0 / p0) * std::pow(energy, 1.0 / p0);
}

}  // namespace warplab
