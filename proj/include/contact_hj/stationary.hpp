#pragma once

// Stationary solutions H(x, u, u_x) = 0: long-time limits of the evolution,
// discounted value iteration, the critical value of frozen Hamiltonians and
// the admissible shift.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "contact_hj/errors.hpp"
#include "contact_hj/evolve.hpp"
#include "contact_hj/grid.hpp"
#include "contact_hj/models.hpp"
#include "contact_hj/series.hpp"

namespace contact_hj {

enum class StationaryMethod { longtime, discounted };

struct StationaryResult {
  GridFn u_minus;
  StationaryMethod method;
  /// longtime: |u(t+1) - u(t)| at exit. discounted: a posteriori bound on the
  /// distance to the Bellman fixed point.
  double residual;
  long long iterations;
};

/// Evolves in unit-time windows until |u(t+1) - u(t)| < tol.
inline StationaryResult solve_longtime(const ContactModel &m, const GridFn &phi, const EvolveConfig &cfg,
                                       double tol, double t_max) {
  if (!(tol > 0.0))
    throw Error("solve_longtime: tol must be positive");
  Evolver ev(m, phi, cfg);
  const long long per_unit = std::max<long long>(1, ev.steps_for(1.0));
  GridFn u = phi;
  double last = std::numeric_limits<double>::infinity();
  long long windows = 0;
  for (double t = 0.0; t < t_max; t += 1.0) {
    GridFn next = ev.advance(u, per_unit);
    last = sup_dist(next, u);
    u = std::move(next);
    ++windows;
    if (last < tol)
      return {std::move(u), StationaryMethod::longtime, last, windows};
  }
  throw NotConverged("solve_longtime: |u(t+1)-u(t)| = " + format_real(last) + " after t_max=" +
                     format_real(t_max) + " (tol " + format_real(tol) + ")");
}

struct DiscountedConfig {
  std::size_t n = 256;
  /// Bellman time step; 0 selects the grid spacing.
  double dt = 0.0;
  double v_box = 4.0;
  int v_samples = 129;
  long long max_sweeps = 2'000'000;
};

/// One Jacobi sweep of the discounted Bellman operator
///   (B u)_i = min_v { e^{-lambda dt} u~(x_i - v dt) + dt l(x_i, v) },
/// with l(x, v) = L(x, 0, v) the Lagrangian of h in H = lambda u + h.
inline GridFn discounted_bellman(const ContactModel &m, const GridFn &u, double dt, const VelocitySearch &vs) {
  if (!m.discount)
    throw NotDiscountedForm("model " + m.name + " is not of the form lambda*u + h(x,p)");
  const double beta = std::exp(-*m.discount * dt);
  std::vector<double> next(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double x = u.grid().node(i);
    legendre_L(m, x, 0.0, -vs.v_box);
    legendre_L(m, x, 0.0, vs.v_box);
    next[i] = detail::minimize_velocity(
        [&](double v) { return beta * u.interpolate(x - v * dt) + dt * detail::lagrangian_unchecked(m, x, 0.0, v); },
        vs);
  }
  return GridFn(u.grid(), std::move(next));
}

/// Value iteration on the discounted Bellman operator. Stops once the sweep
/// defect certifies |u - u*| <= tol, i.e. defect <= tol (1 - e^{-lambda dt}).
/// `defects`, when given, receives the defect of every sweep.
inline StationaryResult solve_discounted(const ContactModel &m, double tol, const DiscountedConfig &cfg = {},
                                         std::optional<GridFn> initial = std::nullopt,
                                         std::vector<double> *defects = nullptr) {
  if (!m.discount || !(*m.discount > 0.0))
    throw NotDiscountedForm("model " + m.name + " is not of the form lambda*u + h(x,p)");
  if (!(tol > 0.0))
    throw Error("solve_discounted: tol must be positive");
  TorusGrid grid(cfg.n);
  const double dt = cfg.dt > 0.0 ? cfg.dt : grid.spacing();
  const double contraction = std::exp(-*m.discount * dt);
  const VelocitySearch vs{cfg.v_box, cfg.v_samples};
  GridFn u = initial ? *initial : GridFn::constant(grid, 0.0);
  if (!(u.grid() == grid))
    throw GridMismatch("solve_discounted: initial guess on a different grid");
  for (long long k = 1; k <= cfg.max_sweeps; ++k) {
    GridFn next = discounted_bellman(m, u, dt, vs);
    double defect = sup_dist(next, u);
    if (defects)
      defects->push_back(defect);
    u = std::move(next);
    if (defect <= tol * (1.0 - contraction))
      return {std::move(u), StationaryMethod::discounted, defect / (1.0 - contraction), k};
  }
  throw NotConverged("solve_discounted: sweep budget exhausted");
}

struct CriticalConfig {
  DiscountedConfig discounted{64, 0.05, 4.0, 129, 2'000'000};
  /// Distance-to-fixed-point tolerance for each rung, in units of -lambda*u.
  double tol = 1e-6;
};

struct LadderEntry {
  double lambda;
  double estimate; // -lambda * mean(u_lambda)
};

struct CriticalValueResult {
  std::string h_id;
  std::vector<LadderEntry> ladder;
  double c = 0.0;
  /// Estimates are monotone along the ladder.
  bool ladder_monotone = true;
};

inline const std::vector<double> &default_ladder() {
  static const std::vector<double> ladder{0.4, 0.2, 0.1, 0.05};
  return ladder;
}

/// Vanishing-discount estimate of c(h^a) for h^a(x,p) = H(x,a,p): solves
/// lambda_k u + h^a = 0 along the ladder and extrapolates -lambda_k mean(u)
/// linearly to lambda = 0.
inline CriticalValueResult critical_value(const ContactModel &m, double a_freeze,
                                          const std::vector<double> &ladder = default_ladder(),
                                          const CriticalConfig &cfg = {}) {
  if (ladder.empty())
    throw Error("critical_value: empty discount ladder");
  for (std::size_t k = 0; k < ladder.size(); ++k)
    if (!(ladder[k] > 0.0) || (k > 0 && !(ladder[k] < ladder[k - 1])))
      throw Error("critical_value: ladder must be positive and strictly decreasing");
  const ContactModel h = models::frozen_at(m, a_freeze);
  CriticalValueResult r;
  r.h_id = h.name;
  TorusGrid grid(cfg.discounted.n);
  double guess = 0.0;
  for (double lambda : ladder) {
    ContactModel dm = models::discounted(h, lambda);
    GridFn start = GridFn::constant(grid, -guess / lambda);
    auto res = solve_discounted(dm, cfg.tol / lambda, cfg.discounted, start);
    double mean = 0.0;
    for (double v : res.u_minus.values())
      mean += v;
    mean /= static_cast<double>(res.u_minus.size());
    double est = -lambda * mean;
    if (!std::isfinite(est))
      throw NotConverged("critical_value: non-finite estimate");
    r.ladder.push_back({lambda, est});
    guess = est;
  }
  if (r.ladder.size() == 1) {
    r.c = r.ladder.front().estimate;
  } else {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(r.ladder.size());
    for (auto &e : r.ladder) {
      sx += e.lambda;
      sy += e.estimate;
      sxx += e.lambda * e.lambda;
      sxy += e.lambda * e.estimate;
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    r.c = (sy - slope * sx) / n;
  }
  bool inc = true, dec = true;
  for (std::size_t k = 1; k < r.ladder.size(); ++k) {
    inc = inc && r.ladder[k].estimate >= r.ladder[k - 1].estimate;
    dec = dec && r.ladder[k].estimate <= r.ladder[k - 1].estimate;
  }
  r.ladder_monotone = inc || dec;
  return r;
}

struct AdmissibleShift {
  double a = 0.0;
  double c_at_a = 0.0;
  int evaluations = 0;
};

/// Bisection for a with c(h^a) = 0. The map a -> c(h^a) is nondecreasing when
/// dH/du >= 0, so a sign change on the bracket locates the root.
inline AdmissibleShift admissible_shift(const ContactModel &m, double a_lo, double a_hi, double tol,
                                        const std::vector<double> &ladder = default_ladder(),
                                        const CriticalConfig &cfg = {}) {
  if (!(a_lo < a_hi) || !(tol > 0.0))
    throw BracketInvalid("admissible_shift: need a_lo < a_hi and tol > 0");
  AdmissibleShift out;
  auto c_of = [&](double a) {
    ++out.evaluations;
    return critical_value(m, a, ladder, cfg).c;
  };
  double c_lo = c_of(a_lo), c_hi = c_of(a_hi);
  if (!(c_lo < 0.0 && c_hi > 0.0))
    throw BracketInvalid("admissible_shift: c(h^a) = " + format_real(c_lo) + ", " + format_real(c_hi) +
                         " at the bracket ends; 0 may lie outside the admissible set there");
  double lo = a_lo, hi = a_hi;
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    double c_mid = c_of(mid);
    out.a = mid;
    out.c_at_a = c_mid;
    if (std::fabs(c_mid) < tol || hi - lo < 1e-10)
      break;
    if (c_mid < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return out;
}

/// Sup distance to u_minus along the evolution of phi (discounted models).
inline Series discounted_gap(const ContactModel &m, const GridFn &phi, const GridFn &u_minus,
                             const std::vector<double> &times, EvolveConfig cfg) {
  if (!m.discount)
    throw NotDiscountedForm("discounted_gap: model " + m.name + " is not in discounted form");
  cfg.snapshot_times = times;
  auto run = evolve(m, phi, cfg);
  Series s;
  for (const auto &snap : run.snapshots)
    s.push_back({snap.t, sup_dist(snap.u, u_minus)});
  return s;
}

inline void write_csv(const CriticalValueResult &r, const std::string &path) {
  std::ofstream os(path);
  if (!os)
    throw Error("cannot open " + path + " for writing");
  os << "lambda,estimate\n";
  for (const auto &e : r.ladder)
    os << format_real(e.lambda) << ',' << format_real(e.estimate) << '\n';
}

} // namespace contact_hj
