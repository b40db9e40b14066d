#pragma once

// Discrete differential operators and quadratures on the periodic grid.
//
// The arclength derivative is f' = (1/w) df/ds.  First derivatives use the
// centered stencil; second derivatives and the Laplacian use half-point
// fluxes so that the Laplacian is exactly self-adjoint for the volume
// quadrature: <Delta f, g> = -dirichlet_form(f, g) holds to roundoff,
// which the Moser-iteration checks rely on.

#include <cmath>
#include <vector>

#include "warplab/metric.hpp"

namespace warplab {

// f' = (1/w) df/ds, centered
inline std::vector<double> deriv1_arc(const WarpedMetric& m, const std::vector<double>& f) {
  int n = m.n();
  double ds = m.ds();
  std::vector<double> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    int ip = m.grid.wrap(i + 1), im = m.grid.wrap(i - 1);
    out[i] = (f[ip] - f[im]) / (2.0 * m.w[i] * ds);
  }
  return out;
}

// f'' = (1/w) d/ds ((1/w) df/ds), half-point fluxes
inline std::vector<double> deriv2_arc(const WarpedMetric& m, const std::vector<double>& f) {
  int n = m.n();
  double ds = m.ds();
  std::vector<double> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    int ip = m.grid.wrap(i + 1), im = m.grid.wrap(i - 1);
    double wp = 0.5 * (m.w[i] + m.w[ip]);
    double wm = 0.5 * (m.w[i] + m.w[im]);
    out[i] = ((f[ip] - f[i]) / wp - (f[i] - f[im]) / wm) / (m.w[i] * ds * ds);
  }
  return out;
}

// node measure of the 4-volume: mu_i = 8 pi^2 w a b^2 ds
inline std::vector<double> node_measure(const WarpedMetric& m) {
  int n = m.n();
  double ds = m.ds();
  std::vector<double> mu(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) mu[i] = eight_pi_sq * m.w[i] * m.a[i] * m.b[i] * m.b[i] * ds;
  return mu;
}

// edge coefficient of the divergence-form Laplacian: average of a b^2 / w
inline std::vector<double> edge_coefficients(const WarpedMetric& m) {
  int n = m.n();
  std::vector<double> q(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    int ip = m.grid.wrap(i + 1);
    double qi = m.a[i] * m.b[i] * m.b[i] / m.w[i];
    double qp = m.a[ip] * m.b[ip] * m.b[ip] / m.w[ip];
    q[i] = 0.5 * (qi + qp);  // edge between nodes i and i+1
  }
  return q;
}

// Delta f = (1/(w a b^2)) D_s ((a b^2 / w) D_s f)
inline std::vector<double> laplacian_radial(const WarpedMetric& m, const std::vector<double>& f) {
  int n = m.n();
  double ds = m.ds();
  std::vector<double> q = edge_coefficients(m);
  std::vector<double> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    int ip = m.grid.wrap(i + 1), im = m.grid.wrap(i - 1);
    double flux = q[i] * (f[ip] - f[i]) - q[im] * (f[i] - f[im]);
    out[i] = flux / (m.w[i] * m.a[i] * m.b[i] * m.b[i] * ds * ds);
  }
  return out;
}

// integral of a node field over the whole manifold
inline double integral(const WarpedMetric& m, const std::vector<double>& f) {
  std::vector<double> mu = node_measure(m);
  double s = 0.0;
  for (int i = 0; i < m.n(); ++i) s += f[i] * mu[i];
  return s;
}

inline double integral(const WarpedMetric& m) {
  std::vector<double> one(static_cast<size_t>(m.n()), 1.0);
  return integral(m, one);
}

// int |grad u|^2 dV via edge quadrature; equals <u, -Delta u> exactly
inline double dirichlet_energy(const WarpedMetric& m, const std::vector<double>& u) {
  int n = m.n();
  double ds = m.ds();
  std::vector<double> q = edge_coefficients(m);
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    int ip = m.grid.wrap(i + 1);
    double d = u[ip] - u[i];
    s += q[i] * d * d;
  }
  return eight_pi_sq * s / ds;
}

// int |grad chi|^2 g dV with the node field g averaged onto edges
inline double gradsq_weighted(const WarpedMetric& m, const std::vector<double>& chi,
                              const std::vector<double>& g) {
  int n = m.n();
  double ds = m.ds();
  std::vector<double> q = edge_coefficients(m);
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    int ip = m.grid.wrap(i + 1);
    double d = chi[ip] - chi[i];
    s += q[i] * d * d * 0.5 * (g[i] + g[ip]);
  }
  return eight_pi_sq * s / ds;
}

// L^p norm ||f||_p = (int |f|^p dV)^(1/p)
inline double lp_norm(const WarpedMetric& m, const std::vector<double>& f, double p) {
  std::vector<double> mu = node_measure(m);
  double s = 0.0;
  for (int i = 0; i < m.n(); ++i) s += std::pow(std::abs(f[i]), p) * mu[i];
  return std::pow(s, 1.0 / p);
}

}  // namespace warplab
