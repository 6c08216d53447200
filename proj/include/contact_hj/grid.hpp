#pragma once

// Periodic grid functions on the flat circle [0,1) and their discrete calculus.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "contact_hj/errors.hpp"

namespace contact_hj {

/// Maps any real coordinate to its representative in [0,1).
inline double wrap_torus(double x) {
  double w = x - std::floor(x);
  return w >= 1.0 ? 0.0 : w;
}

/// Geodesic distance on the unit circle.
inline double torus_dist(double a, double b) {
  double d = std::fabs(wrap_torus(a - b));
  return std::min(d, 1.0 - d);
}

/// Formats a double with 17 significant digits (round-trip exact). Negative
/// zero prints as 0.
inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);
  return buf;
}

/// Uniform periodic grid with nodes x_i = i/n.
class TorusGrid {
public:
  explicit TorusGrid(std::size_t n) : n_(n) {
    if (n < 16)
      throw Error("TorusGrid: need at least 16 nodes, got " + std::to_string(n));
  }

  std::size_t size() const { return n_; }
  double spacing() const { return 1.0 / static_cast<double>(n_); }
  double node(std::size_t i) const {
    return static_cast<double>(i) / static_cast<double>(n_);
  }
  std::size_t wrap_index(long long i) const {
    long long n = static_cast<long long>(n_);
    long long r = i % n;
    return static_cast<std::size_t>(r < 0 ? r + n : r);
  }
  /// Index of the node closest to x on the circle.
  std::size_t nearest_node(double x) const {
    return wrap_index(std::llround(wrap_torus(x) * static_cast<double>(n_)));
  }

  friend bool operator==(const TorusGrid &, const TorusGrid &) = default;

private:
  std::size_t n_;
};

/// Periodic samples of a scalar function. Values are fixed at construction.
class GridFn {
public:
  GridFn(TorusGrid grid, std::vector<double> values)
      : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size())
      throw GridMismatch("GridFn: value count does not match the grid");
    for (double v : values_)
      if (!std::isfinite(v))
        throw Error("GridFn: non-finite value");
  }

  template <class F> static GridFn sample(TorusGrid grid, F &&f) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] = f(grid.node(i));
    return GridFn(grid, std::move(v));
  }

  static GridFn constant(TorusGrid grid, double c) {
    return GridFn(grid, std::vector<double>(grid.size(), c));
  }

  const TorusGrid &grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }

  double operator[](std::size_t i) const { return values_[i]; }
  /// Periodic access; any integer index is valid.
  double at(long long i) const { return values_[grid_.wrap_index(i)]; }

  /// Piecewise-linear interpolation at an arbitrary torus point.
  double interpolate(double x) const {
    double s = wrap_torus(x) * static_cast<double>(values_.size());
    double fl = std::floor(s);
    double w = s - fl;
    long long i = static_cast<long long>(fl);
    return (1.0 - w) * at(i) + w * at(i + 1);
  }

  /// Slope of the linear interpolant on the cell containing x.
  double cell_slope(double x) const {
    double s = wrap_torus(x) * static_cast<double>(values_.size());
    long long i = static_cast<long long>(std::floor(s));
    return (at(i + 1) - at(i)) / grid_.spacing();
  }

  double max() const { return *std::max_element(values_.begin(), values_.end()); }
  double min() const { return *std::min_element(values_.begin(), values_.end()); }

private:
  TorusGrid grid_;
  std::vector<double> values_;
};

struct Slopes {
  double left;
  double right;
  double central() const { return 0.5 * (left + right); }
};

/// Backward and forward difference quotients at node i, wrapping periodically.
inline Slopes one_sided_slopes(const GridFn &f, long long i) {
  const double h = f.grid().spacing();
  const double fi = f.at(i);
  return {(fi - f.at(i - 1)) / h, (f.at(i + 1) - fi) / h};
}

inline double sup_dist(const GridFn &f, const GridFn &g) {
  if (!(f.grid() == g.grid()))
    throw GridMismatch("sup_dist: functions live on different grids");
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    m = std::max(m, std::fabs(f[i] - g[i]));
  return m;
}

inline double sup_norm(const GridFn &f) {
  double m = 0.0;
  for (double v : f.values())
    m = std::max(m, std::fabs(v));
  return m;
}

/// Largest second difference quotient. Stays bounded under refinement for
/// semiconcave data and grows like 1/h at convex kinks.
inline double semiconcavity_profile(const GridFn &f) {
  const double h = f.grid().spacing();
  double m = -std::numeric_limits<double>::infinity();
  const long long n = static_cast<long long>(f.size());
  for (long long i = 0; i < n; ++i)
    m = std::max(m, (f.at(i + 1) - 2.0 * f.at(i) + f.at(i - 1)) / (h * h));
  return m;
}

inline void write_csv(const GridFn &f, std::ostream &os) {
  os << "x,value\n";
  for (std::size_t i = 0; i < f.size(); ++i)
    os << format_real(f.grid().node(i)) << ',' << format_real(f[i]) << '\n';
}

inline void write_csv(const GridFn &f, const std::string &path) {
  std::ofstream os(path);
  if (!os)
    throw Error("cannot open " + path + " for writing");
  write_csv(f, os);
}

/// Reads an `x,value` CSV. Rows must list the nodes of a uniform grid in order.
inline GridFn read_csv(const std::string &path) {
  std::ifstream is(path);
  if (!is)
    throw Error("cannot open " + path);
  std::string line;
  std::getline(is, line);
  std::vector<double> values;
  while (std::getline(is, line)) {
    if (line.empty())
      continue;
    auto comma = line.find(',');
    if (comma == std::string::npos)
      throw Error("malformed row in " + path + ": " + line);
    values.push_back(std::stod(line.substr(comma + 1)));
  }
  TorusGrid grid(values.size());
  return GridFn(grid, std::move(values));
}

} // namespace contact_hj
