#pragma once

// Contact Hamilton flow
//   x' = H_p,  p' = -H_x - H_u p,  u' = H_p p - H
// integrated with classical RK4, plus energy and calibration diagnostics.

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "contact_hj/errors.hpp"
#include "contact_hj/grid.hpp"
#include "contact_hj/jets.hpp"
#include "contact_hj/models.hpp"

namespace contact_hj {

struct PhasePoint {
  double x = 0.0;
  double u = 0.0;
  double p = 0.0;
};

struct TrajectorySample {
  double t;
  PhasePoint z;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  double dt = 0.0;

  const PhasePoint &front() const { return samples.front().z; }
  const PhasePoint &back() const { return samples.back().z; }
};

namespace detail {

inline std::array<double, 3> contact_field(const ContactModel &m, double x, double u, double p) {
  const double hp = m.dH_dp(x, u, p);
  return {hp, hp * p - m.H(x, u, p), -m.dH_dx(x, u, p) - m.dH_du(x, u, p) * p};
}

inline PhasePoint rk4_step(const ContactModel &m, const PhasePoint &z, double h) {
  auto k1 = contact_field(m, z.x, z.u, z.p);
  PhasePoint z2{wrap_torus(z.x + 0.5 * h * k1[0]), z.u + 0.5 * h * k1[1], z.p + 0.5 * h * k1[2]};
  auto k2 = contact_field(m, z2.x, z2.u, z2.p);
  PhasePoint z3{wrap_torus(z.x + 0.5 * h * k2[0]), z.u + 0.5 * h * k2[1], z.p + 0.5 * h * k2[2]};
  auto k3 = contact_field(m, z3.x, z3.u, z3.p);
  PhasePoint z4{wrap_torus(z.x + h * k3[0]), z.u + h * k3[1], z.p + h * k3[2]};
  auto k4 = contact_field(m, z4.x, z4.u, z4.p);
  return {wrap_torus(z.x + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])),
          z.u + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
          z.p + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])};
}

} // namespace detail

/// Integrates from t0 to t1 (either direction) with step |dt|; the last step
/// is shortened to land on t1.
inline Trajectory integrate(const ContactModel &m, PhasePoint z0, double t0, double t1, double dt) {
  if (!(dt > 0.0) || t1 == t0)
    throw Error("integrate: need dt > 0 and t1 != t0");
  const double dir = t1 > t0 ? 1.0 : -1.0;
  const double span = std::fabs(t1 - t0);
  const long long full = static_cast<long long>(std::floor(span / dt * (1.0 + 1e-12)));
  Trajectory tr;
  tr.dt = dt;
  z0.x = wrap_torus(z0.x);
  tr.samples.push_back({t0, z0});
  PhasePoint z = z0;
  auto check = [&](double t) {
    if (!std::isfinite(z.x) || !std::isfinite(z.u) || !std::isfinite(z.p))
      throw NonFinite("integrate: state overflow at t=" + format_real(t));
  };
  for (long long k = 1; k <= full; ++k) {
    z = detail::rk4_step(m, z, dir * dt);
    double t = t0 + dir * dt * static_cast<double>(k);
    check(t);
    tr.samples.push_back({t, z});
  }
  const double rest = span - dt * static_cast<double>(full);
  if (rest > 1e-12 * std::max(1.0, span)) {
    z = detail::rk4_step(m, z, dir * rest);
    check(t1);
    tr.samples.push_back({t1, z});
  } else {
    tr.samples.back().t = t1;
  }
  return tr;
}

struct EnergyProfile {
  std::vector<std::pair<double, double>> series; // (t, H)
  /// e^{-Lambda |tau|}|H0| <= |H| <= |H0| forward in time (reversed backward).
  bool sandwich_ok = true;
  double max_violation = 0.0;
};

inline EnergyProfile energy_profile(const ContactModel &m, const Trajectory &tr, double tol = 1e-6) {
  if (tr.samples.empty())
    throw Error("energy_profile: empty trajectory");
  EnergyProfile out;
  const double t0 = tr.samples.front().t;
  const auto &z0 = tr.samples.front().z;
  const double h0 = std::fabs(m.H(z0.x, z0.u, z0.p));
  for (const auto &s : tr.samples) {
    double hv = m.H(s.z.x, s.z.u, s.z.p);
    out.series.emplace_back(s.t, hv);
    double tau = s.t - t0;
    double a = std::fabs(hv);
    double lo, hi;
    if (tau >= 0.0) {
      lo = std::exp(-m.Lambda * tau) * h0;
      hi = h0;
    } else {
      lo = h0;
      hi = std::exp(m.Lambda * -tau) * h0;
    }
    double viol = std::max(lo - a, a - hi);
    out.max_violation = std::max(out.max_violation, viol);
    if (viol > tol)
      out.sandwich_ok = false;
  }
  return out;
}

/// Action defect |u(x(end)) - u(x(start)) - int L(x, u(x), x') dtau| along
/// the trajectory, oriented from earliest to latest time, trapezoid rule.
/// Velocities are x' = H_p evaluated on the trajectory samples.
inline double calibration_residual(const ContactModel &m, const Trajectory &tr, const GridFn &u) {
  if (tr.samples.size() < 2)
    return 0.0;
  std::vector<TrajectorySample> s = tr.samples;
  if (s.front().t > s.back().t)
    std::reverse(s.begin(), s.end());
  auto lagrangian = [&](const TrajectorySample &q) {
    double v = m.dH_dp(q.z.x, q.z.u, q.z.p);
    return legendre_L(m, q.z.x, u.interpolate(q.z.x), v);
  };
  double integral = 0.0;
  double prev = lagrangian(s.front());
  for (std::size_t k = 1; k < s.size(); ++k) {
    double cur = lagrangian(s[k]);
    integral += 0.5 * (prev + cur) * (s[k].t - s[k - 1].t);
    prev = cur;
  }
  return std::fabs(u.interpolate(s.back().z.x) - u.interpolate(s.front().z.x) - integral);
}

/// Shoots the backward calibrated curve through x from a reachable
/// differential of u_minus. At a corner both one-sided slopes are tried and
/// the one with the smaller calibration residual is kept.
inline Trajectory backward_minimizer(const ContactModel &m, const GridFn &u_minus, double x, double T, double dt,
                                     double corner_tol = 0.0) {
  if (!(T > 0.0))
    throw Error("backward_minimizer: T must be positive");
  if (corner_tol <= 0.0)
    corner_tol = default_corner_tol(u_minus.grid());
  const TorusGrid &g = u_minus.grid();
  std::vector<double> candidates;
  const std::size_t node = g.nearest_node(x);
  if (torus_dist(x, g.node(node)) <= 1e-12)
    candidates = reachable_differentials(u_minus, static_cast<long long>(node), corner_tol);
  else
    candidates = {u_minus.cell_slope(x)};
  const double u0 = u_minus.interpolate(x);
  Trajectory best;
  double best_res = std::numeric_limits<double>::infinity();
  for (double p0 : candidates) {
    Trajectory tr = integrate(m, {x, u0, p0}, 0.0, -T, dt);
    double res = calibration_residual(m, tr, u_minus);
    if (res < best_res) {
      best_res = res;
      best = std::move(tr);
    }
  }
  return best;
}

inline void write_csv(const ContactModel &m, const Trajectory &tr, const std::string &path) {
  std::ofstream os(path);
  if (!os)
    throw Error("cannot open " + path + " for writing");
  os << "t,x,u,p,H\n";
  for (const auto &s : tr.samples)
    os << format_real(s.t) << ',' << format_real(s.z.x) << ',' << format_real(s.z.u) << ','
       << format_real(s.z.p) << ',' << format_real(m.H(s.z.x, s.z.u, s.z.p)) << '\n';
}

} // namespace contact_hj
