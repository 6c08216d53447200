#pragma once

// Convergence diagnostics: error series against the stationary solution, rate
// regression, Hamiltonian residuals on 1-jets, the l_u lower-bound check and
// lambda(H) over compact slabs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "contact_hj/errors.hpp"
#include "contact_hj/evolve.hpp"
#include "contact_hj/grid.hpp"
#include "contact_hj/jets.hpp"
#include "contact_hj/models.hpp"
#include "contact_hj/series.hpp"

namespace contact_hj {

enum class RateKind { exponential, power };

inline std::string to_string(RateKind k) { return k == RateKind::exponential ? "exponential" : "power"; }

/// e ~ prefactor * exp(exponent * t)        (exponential)
/// e ~ prefactor * (1 + t)^exponent         (power)
struct RateFit {
  RateKind kind = RateKind::exponential;
  double exponent = 0.0;
  double prefactor = 0.0;
  double r2 = 0.0;
  double t_min = 0.0;
  double t_max = 0.0;
  std::size_t n_points = 0;
};

struct FitWindow {
  double t_min = 2.0;
  double t_max = std::numeric_limits<double>::infinity();
  /// Fit stops at the first sample below this level (discretization floor).
  double floor = 0.0;
};

namespace detail {

struct LineFit {
  double slope, intercept, r2;
};

inline LineFit least_squares(const std::vector<double> &x, const std::vector<double> &y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  double slope = sxy / sxx;
  double intercept = my - slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double r = y[i] - (intercept + slope * x[i]);
    ss_res += r * r;
  }
  double r2 = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : (ss_res == 0.0 ? 1.0 : 0.0);
  return {slope, intercept, r2};
}

} // namespace detail

/// Log-linear (exponential) or log-log (power) least squares on the samples
/// inside the window. Without a hint both are fitted and the better r2 wins.
inline RateFit fit_rate(const Series &series, const FitWindow &window, std::optional<RateKind> hint = std::nullopt) {
  std::vector<Sample> used;
  for (const auto &s : series) {
    if (s.t < window.t_min || s.t > window.t_max)
      continue;
    if (window.floor > 0.0 && s.value < window.floor)
      break;
    used.push_back(s);
  }
  if (used.size() < 5)
    throw InsufficientData("fit_rate: " + std::to_string(used.size()) + " samples in window, need 5");
  for (const auto &s : used)
    if (!(s.value > 0.0))
      throw NonPositiveValues("fit_rate: nonpositive value at t=" + format_real(s.t) +
                              "; clip the window before the noise floor");
  std::vector<double> logy, tx, logt;
  for (const auto &s : used) {
    logy.push_back(std::log(s.value));
    tx.push_back(s.t);
    logt.push_back(std::log1p(s.t));
  }
  auto make = [&](RateKind k) {
    auto lf = detail::least_squares(k == RateKind::exponential ? tx : logt, logy);
    return RateFit{k, lf.slope, std::exp(lf.intercept), lf.r2, used.front().t, used.back().t, used.size()};
  };
  if (hint)
    return make(*hint);
  RateFit e = make(RateKind::exponential), p = make(RateKind::power);
  return p.r2 > e.r2 ? p : e;
}

inline void write_rate_row(std::ostream &os, const RateFit &f) {
  os << to_string(f.kind) << ',' << format_real(f.exponent) << ',' << format_real(f.prefactor) << ','
     << format_real(f.r2) << ',' << format_real(f.t_min) << ',' << format_real(f.t_max) << ',' << f.n_points;
}

inline Series sup_error_series(const EvolutionRun &run, const GridFn &u_minus) {
  Series s;
  for (const auto &snap : run.snapshots)
    s.push_back({snap.t, sup_dist(snap.u, u_minus)});
  return s;
}

inline Series hausdorff_series(const EvolutionRun &run, const GridFn &u_minus, double corner_tol) {
  const JetCloud target = extract_jets(u_minus, corner_tol, "u_minus");
  Series s;
  for (const auto &snap : run.snapshots) {
    if (!(snap.u.grid() == u_minus.grid()))
      throw GridMismatch("hausdorff_series: snapshot grid differs from u_minus");
    s.push_back({snap.t, hausdorff(extract_jets(snap.u, corner_tol), target)});
  }
  return s;
}

/// max |H(x, u, p)| over the 1-jet cloud of u.
inline double jet_residual(const ContactModel &m, const GridFn &u, double corner_tol) {
  double r = 0.0;
  for (const auto &q : extract_jets(u, corner_tol).points)
    r = std::max(r, std::fabs(m.H(q.x, q.u, q.p)));
  return r;
}

inline Series hamiltonian_residual_series(const ContactModel &m, const EvolutionRun &run, double corner_tol) {
  Series s;
  for (const auto &snap : run.snapshots)
    s.push_back({snap.t, jet_residual(m, snap.u, corner_tol)});
  return s;
}

/// l_u(x, v) = L(x, u(x), v) - du(x; v) at node i.
inline double l_u_eval(const ContactModel &m, const GridFn &u, long long i, double v, double corner_tol) {
  const std::size_t node = u.grid().wrap_index(i);
  return legendre_L(m, u.grid().node(node), u[node], v) - directional_derivative(u, i, v, corner_tol);
}

struct KeyLemmaSampling {
  std::size_t samples = 10000;
  double v_box = 4.0;
  /// Largest admissible near-branch radius; 0 means v_box / 2.
  double delta_max = 0.0;
  double corner_tol = 0.0; // 0 means 10 h
  std::uint64_t seed = 1;
};

struct KeyLemmaReport {
  double alpha = 0.0;
  double delta = 0.0;
  double beta = 0.0;
  std::size_t violations = 0;
  std::size_t near_violations = 0;
  std::size_t far_violations = 0;
  std::size_t samples = 0;
};

/// Samples (x_i, v) and fits the two-branch lower bound
///   d <= delta : l_u + min_{D*} H >= alpha d^2
///   d >  delta : l_u + min_{D*} H >= beta
/// where d is the distance to the velocity graph {(x, H_p(x, u(x), p))}.
/// delta is the smallest radius that makes the far branch hold (capped at
/// delta_max); alpha is the largest constant that makes the near branch hold.
inline KeyLemmaReport key_lemma_check(const ContactModel &m, const GridFn &u, double beta,
                                      const KeyLemmaSampling &spec = {}) {
  if (!(beta > 0.0))
    throw Error("key_lemma_check: beta must be positive");
  const double tol = spec.corner_tol > 0.0 ? spec.corner_tol : default_corner_tol(u.grid());
  const double delta_max = spec.delta_max > 0.0 ? spec.delta_max : 0.5 * spec.v_box;
  const JetCloud jets = extract_jets(u, tol);

  struct GraphPoint {
    double x, v;
  };
  std::vector<GraphPoint> graph;
  std::vector<double> min_h(u.size(), std::numeric_limits<double>::infinity());
  for (const auto &q : jets.points) {
    graph.push_back({q.x, m.dH_dp(q.x, q.u, q.p)});
    min_h[q.node] = std::min(min_h[q.node], m.H(q.x, q.u, q.p));
  }

  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<std::size_t> pick_node(0, u.size() - 1);
  std::uniform_real_distribution<double> pick_v(-spec.v_box, spec.v_box);
  struct Point {
    double d, margin;
  };
  std::vector<Point> pts;
  pts.reserve(spec.samples);
  for (std::size_t k = 0; k < spec.samples; ++k) {
    std::size_t i = pick_node(rng);
    double v = pick_v(rng);
    double x = u.grid().node(i);
    double d = std::numeric_limits<double>::infinity();
    for (const auto &g : graph)
      d = std::min(d, torus_dist(x, g.x) + std::fabs(v - g.v));
    double margin = l_u_eval(m, u, static_cast<long long>(i), v, tol) + min_h[i];
    pts.push_back({d, margin});
  }

  KeyLemmaReport r;
  r.beta = beta;
  r.samples = pts.size();
  double delta = 0.0;
  for (const auto &p : pts)
    if (p.margin < beta)
      delta = std::max(delta, p.d);
  r.delta = std::min(delta, delta_max);
  double alpha = std::numeric_limits<double>::infinity();
  for (const auto &p : pts)
    if (p.d <= r.delta && p.d > 0.0)
      alpha = std::min(alpha, p.margin / (p.d * p.d));
  if (!std::isfinite(alpha))
    alpha = 0.0;
  r.alpha = alpha;
  for (const auto &p : pts) {
    if (p.d <= r.delta) {
      bool ok = p.d == 0.0 ? p.margin >= -1e-12 : (r.alpha > 0.0 && p.margin >= r.alpha * p.d * p.d);
      if (!ok)
        ++r.near_violations;
    } else if (p.margin < beta) {
      ++r.far_violations;
    }
  }
  r.violations = r.near_violations + r.far_violations;
  return r;
}

struct CompactSlab {
  double u_lo = -1.0;
  double u_hi = 1.0;
  double B = 1.0;
  int x_samples = 32;
  int u_samples = 201;
  int p_samples = 2001;
  double p_box = 0.0; // 0 means the model's p_box
};

/// inf of dH/du over the sampled set {u in I, |H| <= B}.
inline double lambda_estimate(const ContactModel &m, const CompactSlab &slab) {
  if (!(slab.u_lo < slab.u_hi) || !(slab.B > 0.0) || slab.u_samples < 2 || slab.p_samples < 2 ||
      slab.x_samples < 1)
    throw Error("lambda_estimate: invalid slab");
  const double pb = slab.p_box > 0.0 ? slab.p_box : m.p_box;
  double best = std::numeric_limits<double>::infinity();
  for (int ix = 0; ix < slab.x_samples; ++ix) {
    double x = static_cast<double>(ix) / slab.x_samples;
    for (int iu = 0; iu < slab.u_samples; ++iu) {
      double u = slab.u_lo + (slab.u_hi - slab.u_lo) * iu / (slab.u_samples - 1);
      for (int ip = 0; ip < slab.p_samples; ++ip) {
        double p = -pb + 2.0 * pb * ip / (slab.p_samples - 1);
        if (std::fabs(m.H(x, u, p)) <= slab.B)
          best = std::min(best, m.dH_du(x, u, p));
      }
    }
  }
  if (!std::isfinite(best))
    throw EmptySlab("lambda_estimate: no sample satisfies |H| <= B");
  return best;
}

} // namespace contact_hj
