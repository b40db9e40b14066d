#pragma once

// Periodic 1-d grid and radial (s-dependent) field types shared by the
// whole laboratory.  Every geometric object lives on a circle of coordinate
// period `length` sampled at `n` equally spaced nodes.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace warplab {

struct Grid {
  int n = 0;
  double length = 0.0;

  double ds() const { return length / n; }
  double coord(int i) const { return ds() * i; }

  int wrap(int i) const {
    int r = i % n;
    return r < 0 ? r + n : r;
  }

  bool operator==(const Grid&) const = default;

  static Grid make(int n, double length) {
    if (n < 16)
      throw std::invalid_argument("Grid: need at least 16 sample points, got " +
                                  std::to_string(n));
    if (!(length > 0.0) || !std::isfinite(length))
      throw std::invalid_argument("Grid: period length must be positive and finite");
    return Grid{n, length};
  }
};

struct RadialFunction {
  Grid grid;
  std::vector<double> values;
  std::string label;

  double& operator[](int i) { return values[static_cast<size_t>(grid.wrap(i))]; }
  double operator[](int i) const { return values[static_cast<size_t>(grid.wrap(i))]; }
  int size() const { return grid.n; }

  static RadialFunction constant(const Grid& g, double value, std::string label = "") {
    return RadialFunction{g, std::vector<double>(static_cast<size_t>(g.n), value),
                          std::move(label)};
  }
};

inline bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

// Index of the first nonpositive entry, or -1 when all entries are positive.
inline int first_nonpositive(const std::vector<double>& v) {
  for (size_t i = 0; i < v.size(); ++i)
    if (!(v[i] > 0.0)) return static_cast<int>(i);
  return -1;
}

inline double sup_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;
// fiber volume factor of the ansatz: (2*pi a) * (4*pi b^2) = 8 pi^2 a b^2
inline constexpr double eight_pi_sq = 8.0 * pi * pi;

}  // namespace warplab
