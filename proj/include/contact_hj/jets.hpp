#pragma once

// 1-jets of grid functions: the cloud {(x, u(x), p) : p reachable differential}
// and the Hausdorff distance between clouds.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "contact_hj/errors.hpp"
#include "contact_hj/grid.hpp"

namespace contact_hj {

enum class JetKind : int {
  smooth = 0,
  corner = 1,      // concave kink: left slope exceeds right slope
  convex_kink = 2, // right slope exceeds left slope; not semiconcave
};

struct JetPoint {
  double x = 0.0;
  double u = 0.0;
  double p = 0.0;
  JetKind kind = JetKind::smooth;
  std::size_t node = 0;
};

struct JetCloud {
  std::vector<JetPoint> points;
  std::string source;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

inline double default_corner_tol(const TorusGrid &g) { return 10.0 * g.spacing(); }

/// Reachable differentials at node i: both one-sided slopes at a kink whose
/// slope jump exceeds corner_tol, otherwise the central slope alone.
inline std::vector<double> reachable_differentials(const GridFn &f, long long i, double corner_tol,
                                                   JetKind *kind = nullptr) {
  auto s = one_sided_slopes(f, i);
  JetKind k = JetKind::smooth;
  if (s.left - s.right > corner_tol)
    k = JetKind::corner;
  else if (s.right - s.left > corner_tol)
    k = JetKind::convex_kink;
  if (kind)
    *kind = k;
  if (k == JetKind::smooth)
    return {s.central()};
  return {s.right, s.left};
}

inline JetCloud extract_jets(const GridFn &f, double corner_tol, std::string source = {}) {
  if (!(corner_tol > 0.0))
    throw Error("extract_jets: corner_tol must be positive");
  JetCloud cloud;
  cloud.source = std::move(source);
  cloud.points.reserve(f.size() + 16);
  for (std::size_t i = 0; i < f.size(); ++i) {
    JetKind kind;
    auto ps = reachable_differentials(f, static_cast<long long>(i), corner_tol, &kind);
    for (double p : ps)
      cloud.points.push_back({f.grid().node(i), f[i], p, kind, i});
  }
  return cloud;
}

inline JetCloud extract_jets(const GridFn &f) { return extract_jets(f, default_corner_tol(f.grid())); }

/// Lower Dini derivative along v: min over reachable differentials of p*v.
inline double directional_derivative(const GridFn &f, long long i, double v, double corner_tol) {
  double best = std::numeric_limits<double>::infinity();
  for (double p : reachable_differentials(f, i, corner_tol))
    best = std::min(best, p * v);
  return best;
}

/// Flat sum metric: torus distance + |du| + |dp|.
inline double jet_metric(const JetPoint &a, const JetPoint &b) {
  return torus_dist(a.x, b.x) + std::fabs(a.u - b.u) + std::fabs(a.p - b.p);
}

namespace detail {

inline double directed_hausdorff(const JetCloud &a, const JetCloud &b) {
  double worst = 0.0;
  for (const auto &pa : a.points) {
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto &pb : b.points) {
      nearest = std::min(nearest, jet_metric(pa, pb));
      if (nearest <= worst)
        break; // cannot raise the running maximum
    }
    worst = std::max(worst, nearest);
  }
  return worst;
}

} // namespace detail

inline double hausdorff(const JetCloud &a, const JetCloud &b) {
  if (a.empty() || b.empty())
    throw EmptyCloud("hausdorff: both clouds must be nonempty");
  return std::max(detail::directed_hausdorff(a, b), detail::directed_hausdorff(b, a));
}

inline void write_csv(const JetCloud &c, const std::string &path) {
  std::ofstream os(path);
  if (!os)
    throw Error("cannot open " + path + " for writing");
  os << "x,u,p,corner_flag\n";
  for (const auto &q : c.points)
    os << format_real(q.x) << ',' << format_real(q.u) << ',' << format_real(q.p) << ','
       << static_cast<int>(q.kind) << '\n';
}

} // namespace contact_hj
