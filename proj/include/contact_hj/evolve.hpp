#pragma once

// Discretizations of the solution semigroup T_t of
//   u_t + H(x, u, u_x) = 0,  u(0, .) = phi
// on the circle: a monotone Lax-Friedrichs scheme and a semi-Lagrangian
// scheme built on the implicit variational formula.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "contact_hj/errors.hpp"
#include "contact_hj/grid.hpp"
#include "contact_hj/models.hpp"

namespace contact_hj {

enum class Scheme { lax_friedrichs, semi_lagrangian };

inline std::string to_string(Scheme s) {
  return s == Scheme::lax_friedrichs ? "lax_friedrichs" : "semi_lagrangian";
}

struct EvolveConfig {
  Scheme scheme = Scheme::lax_friedrichs;
  /// Time step; 0 selects cfl_safety/(theta/h + Lambda) for LF and h for SL.
  double dt = 0.0;
  double cfl_safety = 0.5;
  /// Fixed LF dissipation. When unset it is re-estimated from the solution.
  std::optional<double> theta;
  double theta_min = 1.0;
  int theta_refresh = 100;
  /// SL velocity window; 0 selects 1.5 x the largest characteristic speed of
  /// the initial data (at least 1).
  double v_box = 0.0;
  int v_samples = 129;
  int inner_fixpoint_iters = 0;
  std::vector<double> snapshot_times;
};

struct Snapshot {
  double t;
  GridFn u;
};

struct EvolutionRun {
  std::string model;
  EvolveConfig config; // with dt (and v_box) resolved
  std::vector<Snapshot> snapshots;
};

/// 1.2 x max |dH/dp| over the one-sided slopes of u.
inline double estimate_speed(const ContactModel &m, const GridFn &u) {
  double s = 0.0;
  const long long n = static_cast<long long>(u.size());
  for (long long i = 0; i < n; ++i) {
    auto d = one_sided_slopes(u, i);
    double x = u.grid().node(static_cast<std::size_t>(i));
    s = std::max({s, std::fabs(m.dH_dp(x, u[i], d.left)), std::fabs(m.dH_dp(x, u[i], d.right))});
  }
  return 1.2 * s;
}

/// One explicit Lax-Friedrichs step
///   u_i <- u_i - dt [ H(x_i, u_i, (D+ + D-)/2) - theta/2 (D+ - D-) ].
/// Monotone iff theta >= |dH/dp| on the stencil and dt (theta/h + Lambda) <= 1.
inline GridFn step_lf(const ContactModel &m, const GridFn &u, double dt, double theta) {
  const double h = u.grid().spacing();
  if (!(dt > 0.0) || !(theta >= 0.0) || dt * (theta / h + m.Lambda) > 1.0 + 1e-12)
    throw CflViolation("step_lf: dt=" + format_real(dt) + " theta=" + format_real(theta) +
                       " violates dt*(theta/h + Lambda) <= 1 at h=" + format_real(h));
  const long long n = static_cast<long long>(u.size());
  std::vector<double> next(u.size());
  for (long long i = 0; i < n; ++i) {
    auto d = one_sided_slopes(u, i);
    double x = u.grid().node(static_cast<std::size_t>(i));
    double flux = m.H(x, u[i], d.central()) - 0.5 * theta * (d.right - d.left);
    next[i] = u[i] - dt * flux;
  }
  return GridFn(u.grid(), std::move(next));
}

struct VelocitySearch {
  double v_box = 1.0;
  int v_samples = 129;
};

namespace detail {

inline double lagrangian_unchecked(const ContactModel &m, double x, double u, double v) {
  return m.L_closed ? (*m.L_closed)(x, u, v) : legendre_L_numeric(m, x, u, v);
}

/// Minimizes a one-dimensional objective by a uniform scan followed by a
/// golden-section refinement around the best sample.
template <class F> double minimize_velocity(F &&objective, const VelocitySearch &vs) {
  const int n = std::max(vs.v_samples, 3);
  const double spacing = 2.0 * vs.v_box / (n - 1);
  int best_k = 0;
  double best = objective(-vs.v_box);
  for (int k = 1; k < n; ++k) {
    double v = -vs.v_box + spacing * k;
    double f = objective(v);
    if (f < best) {
      best = f;
      best_k = k;
    }
  }
  double a = -vs.v_box + spacing * std::max(best_k - 1, 0);
  double b = -vs.v_box + spacing * std::min(best_k + 1, n - 1);
  constexpr double ratio = 0.6180339887498949;
  double c = b - ratio * (b - a), d = a + ratio * (b - a);
  double fc = objective(c), fd = objective(d);
  for (int it = 0; it < 40; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - ratio * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + ratio * (b - a);
      fd = objective(d);
    }
  }
  return std::min({best, fc, fd});
}

} // namespace detail

/// One semi-Lagrangian step
///   u_i <- min_v { u~(x_i - v dt) + dt L(x_i, u_lag, v) }
/// with u~ the linear interpolant and u_lag = u_i, optionally refined by
/// fixed-point passes that feed the minimum back into L.
inline GridFn step_sl(const ContactModel &m, const GridFn &u, double dt, const VelocitySearch &vs,
                      int inner_fixpoint_iters = 0) {
  if (!(dt > 0.0) || dt * m.Lambda >= 1.0)
    throw CflViolation("step_sl: need dt > 0 and dt*Lambda < 1");
  std::vector<double> next(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double x = u.grid().node(i);
    double lag = u[i];
    double value = lag;
    for (int pass = 0; pass <= inner_fixpoint_iters; ++pass) {
      // dH/dp is increasing in p, so the whole window is attainable once its
      // ends are.
      legendre_L(m, x, lag, -vs.v_box);
      legendre_L(m, x, lag, vs.v_box);
      value = detail::minimize_velocity(
          [&](double v) { return u.interpolate(x - v * dt) + dt * detail::lagrangian_unchecked(m, x, lag, v); },
          vs);
      lag = value;
    }
    next[i] = value;
  }
  return GridFn(u.grid(), std::move(next));
}

/// Time stepper that owns the resolved step size and LF dissipation.
class Evolver {
public:
  Evolver(const ContactModel &model, const GridFn &initial, EvolveConfig cfg)
      : model_(model), cfg_(std::move(cfg)) {
    const double h = initial.grid().spacing();
    const double speed = estimate_speed(model_, initial);
    if (cfg_.scheme == Scheme::lax_friedrichs) {
      if (!(cfg_.cfl_safety > 0.0 && cfg_.cfl_safety <= 1.0))
        throw CflViolation("cfl_safety must lie in (0,1]");
      theta_ = cfg_.theta ? *cfg_.theta : std::max(cfg_.theta_min, speed);
      if (cfg_.dt <= 0.0)
        cfg_.dt = cfg_.cfl_safety / (theta_ / h + model_.Lambda);
    } else {
      if (cfg_.v_box <= 0.0)
        cfg_.v_box = std::max(1.0, 1.25 * speed);
      if (cfg_.dt <= 0.0)
        cfg_.dt = h;
      if (cfg_.dt * model_.Lambda >= 1.0)
        throw CflViolation("semi-Lagrangian step needs dt*Lambda < 1");
    }
    if (cfg_.scheme == Scheme::lax_friedrichs && cfg_.dt * (theta_ / h + model_.Lambda) > 1.0 + 1e-12)
      throw CflViolation("dt=" + format_real(cfg_.dt) + " too large for theta=" + format_real(theta_));
  }

  const EvolveConfig &config() const { return cfg_; }
  double dt() const { return cfg_.dt; }
  double theta() const { return theta_; }

  GridFn step(const GridFn &u) {
    if (cfg_.scheme == Scheme::semi_lagrangian)
      return step_sl(model_, u, cfg_.dt, {cfg_.v_box, cfg_.v_samples}, cfg_.inner_fixpoint_iters);
    if (!cfg_.theta && steps_ > 0 && cfg_.theta_refresh > 0 && steps_ % cfg_.theta_refresh == 0)
      theta_ = std::max(cfg_.theta_min, estimate_speed(model_, u));
    ++steps_;
    return step_lf(model_, u, cfg_.dt, theta_);
  }

  GridFn advance(GridFn u, long long steps) {
    for (long long k = 0; k < steps; ++k)
      u = step(u);
    return u;
  }

  long long steps_for(double t) const { return std::llround(t / cfg_.dt); }

private:
  ContactModel model_;
  EvolveConfig cfg_;
  double theta_ = 0.0;
  long long steps_ = 0;
};

/// Evolves phi and records snapshots at the requested times, each rounded to
/// the nearest multiple of dt.
inline EvolutionRun evolve(const ContactModel &m, const GridFn &phi, const EvolveConfig &cfg) {
  for (std::size_t k = 0; k < cfg.snapshot_times.size(); ++k) {
    if (cfg.snapshot_times[k] < 0.0 || (k > 0 && cfg.snapshot_times[k] <= cfg.snapshot_times[k - 1]))
      throw Error("evolve: snapshot times must be nonnegative and increasing");
  }
  Evolver ev(m, phi, cfg);
  EvolutionRun run{m.name, ev.config(), {}};
  GridFn u = phi;
  long long done = 0;
  for (double t : cfg.snapshot_times) {
    long long target = ev.steps_for(t);
    u = ev.advance(std::move(u), target - done);
    done = std::max(done, target);
    run.snapshots.push_back({static_cast<double>(done) * ev.dt(), u});
  }
  return run;
}

/// Convenience: T_t phi with the given configuration.
inline GridFn evolve_to(const ContactModel &m, const GridFn &phi, double t, EvolveConfig cfg) {
  cfg.snapshot_times = {t};
  return evolve(m, phi, cfg).snapshots.back().u;
}

struct SemigroupReport {
  bool ordered = false;       // phi <= psi nodewise
  bool monotone = true;       // T phi <= T psi + 1e-12 (vacuous when !ordered)
  double order_violation = 0; // max (T phi - T psi)+ when ordered
  double gap_in = 0;          // |phi - psi|
  double gap_out = 0;         // |T phi - T psi|
  bool nonexpansive = true;
  double contraction_margin = 0; // gap_in - gap_out
  double composition_residual = 0;
};

/// Runs both data with one shared dt and dissipation, so the comparison is
/// between applications of the same discrete operator.
inline SemigroupReport check_semigroup_props(const ContactModel &m, const GridFn &phi, const GridFn &psi,
                                             double t, EvolveConfig cfg) {
  if (!(phi.grid() == psi.grid()))
    throw GridMismatch("check_semigroup_props: data on different grids");
  if (cfg.scheme == Scheme::lax_friedrichs && !cfg.theta)
    cfg.theta = std::max({cfg.theta_min, estimate_speed(m, phi), estimate_speed(m, psi)});
  if (cfg.scheme == Scheme::semi_lagrangian && cfg.v_box <= 0.0)
    cfg.v_box = std::max({1.0, 1.25 * estimate_speed(m, phi), 1.25 * estimate_speed(m, psi)});
  Evolver ev_phi(m, phi, cfg);
  cfg.dt = ev_phi.dt();
  Evolver ev_psi(m, psi, cfg);
  const long long steps = ev_phi.steps_for(t);

  GridFn tphi = ev_phi.advance(phi, steps);
  GridFn tpsi = ev_psi.advance(psi, steps);

  SemigroupReport r;
  r.ordered = true;
  for (std::size_t i = 0; i < phi.size(); ++i)
    if (phi[i] > psi[i])
      r.ordered = false;
  if (r.ordered) {
    for (std::size_t i = 0; i < phi.size(); ++i)
      r.order_violation = std::max(r.order_violation, tphi[i] - tpsi[i]);
    r.monotone = r.order_violation <= 1e-12;
  }
  r.gap_in = sup_dist(phi, psi);
  r.gap_out = sup_dist(tphi, tpsi);
  r.nonexpansive = r.gap_out <= r.gap_in + 1e-12;
  r.contraction_margin = r.gap_in - r.gap_out;

  Evolver ev_split(m, phi, cfg);
  const long long first = steps / 2;
  GridFn half = ev_split.advance(phi, first);
  GridFn composed = ev_split.advance(half, steps - first);
  r.composition_residual = sup_dist(tphi, composed);
  return r;
}

/// Writes one `x,value` file per snapshot plus a `t,filename,sup_norm` manifest.
inline void write_run_csv(const EvolutionRun &run, const std::string &dir, const std::string &stem = "snapshot") {
  std::ofstream manifest(dir + "/" + stem + "s.csv");
  if (!manifest)
    throw Error("cannot write manifest in " + dir);
  manifest << "t,filename,sup_norm\n";
  for (std::size_t k = 0; k < run.snapshots.size(); ++k) {
    char name[64];
    std::snprintf(name, sizeof name, "%s_%04zu.csv", stem.c_str(), k);
    write_csv(run.snapshots[k].u, dir + "/" + name);
    manifest << format_real(run.snapshots[k].t) << ',' << name << ','
             << format_real(sup_norm(run.snapshots[k].u)) << '\n';
  }
}

} // namespace contact_hj
