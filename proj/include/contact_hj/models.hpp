#pragma once

// Contact Hamiltonians H(x,u,p) on the circle: evaluators, Legendre duality,
// assumption checks and the built-in catalog.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "contact_hj/errors.hpp"
#include "contact_hj/grid.hpp"

namespace contact_hj {

/// Signature shared by H and its partials: (x, u, p) -> real. The Lagrangian
/// evaluator uses the same shape with a velocity in the last slot.
using Evaluator = std::function<double(double, double, double)>;

struct ContactModel {
  std::string name;
  Evaluator H;
  Evaluator dH_dx;
  Evaluator dH_du;
  Evaluator dH_dp;
  /// Closed-form Lagrangian L(x,u,v), when known.
  std::optional<Evaluator> L_closed;
  /// Upper bound of dH/du.
  double Lambda = 1.0;
  /// Known uniform lower bound of dH/du (0 for degenerate models).
  std::optional<double> lambda_lower;
  /// Half-width of the momentum window used for Legendre inversion and checks.
  double p_box = 20.0;
  /// Set when H(x,u,p) = discount*u + h(x,p) exactly.
  std::optional<double> discount;
  /// Exact stationary solution, when one is known in closed form.
  std::optional<std::function<double(double)>> known_stationary;
};

inline double eval_H(const ContactModel &m, double x, double u, double p) {
  return m.H(x, u, p);
}

// ---------------------------------------------------------------------------
// Smooth plateau function used by the degenerate counterexample.

namespace detail {

inline double bump_tail(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

inline double bump_tail_derivative(double t) {
  return t > 0.0 ? std::exp(-1.0 / t) / (t * t) : 0.0;
}

/// C-infinity step: 0 for t <= 0, 1 for t >= 1.
inline double smooth_step(double t) {
  if (t <= 0.0)
    return 0.0;
  if (t >= 1.0)
    return 1.0;
  double a = bump_tail(t), b = bump_tail(1.0 - t);
  return a / (a + b);
}

inline double smooth_step_derivative(double t) {
  if (t <= 0.0 || t >= 1.0)
    return 0.0;
  double a = bump_tail(t), b = bump_tail(1.0 - t);
  double da = bump_tail_derivative(t), db = bump_tail_derivative(1.0 - t);
  double s = a + b;
  return (da * b + a * db) / (s * s);
}

} // namespace detail

/// Smooth nondecreasing function equal to s on [-1,0], constant -2 on
/// (-inf,-2] and constant 1 on [1,inf).
///
/// On the blend intervals rho(s) = s(1-step) + c*step with c the plateau
/// value; its derivative (1-step) + (c-s)*step' stays nonnegative there.
inline double rho_smooth(double s) {
  if (s >= -1.0 && s <= 0.0)
    return s;
  if (s > 0.0) {
    double w = detail::smooth_step(s);
    return s * (1.0 - w) + 1.0 * w;
  }
  double w = detail::smooth_step(-1.0 - s);
  return s * (1.0 - w) - 2.0 * w;
}

inline double rho_smooth_derivative(double s) {
  if (s >= -1.0 && s <= 0.0)
    return 1.0;
  if (s > 0.0) {
    double w = detail::smooth_step(s);
    return (1.0 - w) + (1.0 - s) * detail::smooth_step_derivative(s);
  }
  double t = -1.0 - s;
  double w = detail::smooth_step(t);
  return (1.0 - w) + (s + 2.0) * detail::smooth_step_derivative(t);
}

// ---------------------------------------------------------------------------
// Legendre duality.

/// Solves v = dH/dp(x,u,p) for p in [-p_box, p_box] by Newton iteration with
/// bisection fallback. dH/dp is strictly increasing in p under (H1).
inline double legendre_momentum(const ContactModel &m, double x, double u, double v) {
  double lo = -m.p_box, hi = m.p_box;
  const double v_lo = m.dH_dp(x, u, lo), v_hi = m.dH_dp(x, u, hi);
  if (!(v >= v_lo && v <= v_hi))
    throw VelocityOutOfRange("velocity " + format_real(v) + " not attainable within p_box=" +
                             format_real(m.p_box) + " for model " + m.name);
  double p = std::clamp(v, lo, hi);
  for (int it = 0; it < 100; ++it) {
    double g = m.dH_dp(x, u, p) - v;
    if (std::fabs(g) <= 1e-12)
      return p;
    if (g > 0.0)
      hi = p;
    else
      lo = p;
    if (hi - lo <= 1e-15 * std::max(1.0, std::fabs(p)))
      return p;
    double step = 1e-6 * std::max(1.0, std::fabs(p));
    double curvature = (m.dH_dp(x, u, p + step) - m.dH_dp(x, u, p - step)) / (2.0 * step);
    double next = curvature > 0.0 ? p - g / curvature : 0.5 * (lo + hi);
    if (!(next > lo && next < hi))
      next = 0.5 * (lo + hi);
    p = next;
  }
  return p;
}

/// L(x,u,v) = sup_p (p v - H(x,u,p)). Uses the closed form when available;
/// the attainability of v is checked either way.
inline double legendre_L(const ContactModel &m, double x, double u, double v) {
  if (m.L_closed) {
    if (!(v >= m.dH_dp(x, u, -m.p_box) && v <= m.dH_dp(x, u, m.p_box)))
      throw VelocityOutOfRange("velocity " + format_real(v) + " not attainable within p_box=" +
                               format_real(m.p_box) + " for model " + m.name);
    return (*m.L_closed)(x, u, v);
  }
  double p = legendre_momentum(m, x, u, v);
  return p * v - m.H(x, u, p);
}

/// Legendre transform evaluated by the numerical route even when a closed form
/// exists. Used to cross-check closed forms.
inline double legendre_L_numeric(const ContactModel &m, double x, double u, double v) {
  double p = legendre_momentum(m, x, u, v);
  return p * v - m.H(x, u, p);
}

// ---------------------------------------------------------------------------
// Catalog.

namespace models {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// H = lambda*u + p^2/2.
inline ContactModel quad(double lambda = 1.0) {
  ContactModel m;
  m.name = "quad";
  m.H = [lambda](double, double u, double p) { return lambda * u + 0.5 * p * p; };
  m.dH_dx = [](double, double, double) { return 0.0; };
  m.dH_du = [lambda](double, double, double) { return lambda; };
  m.dH_dp = [](double, double, double p) { return p; };
  m.L_closed = Evaluator([lambda](double, double u, double v) { return 0.5 * v * v - lambda * u; });
  m.Lambda = lambda;
  m.lambda_lower = lambda;
  m.discount = lambda;
  m.known_stationary = [](double) { return 0.0; };
  return m;
}

/// H = lambda*u + p^2/2 + A cos(2 pi x).
inline ContactModel mechanical(double lambda = 1.0, double amplitude = 0.3) {
  ContactModel m;
  m.name = "mechanical";
  m.H = [=](double x, double u, double p) {
    return lambda * u + 0.5 * p * p + amplitude * std::cos(two_pi * x);
  };
  m.dH_dx = [=](double x, double, double) { return -two_pi * amplitude * std::sin(two_pi * x); };
  m.dH_du = [=](double, double, double) { return lambda; };
  m.dH_dp = [](double, double, double p) { return p; };
  m.L_closed = Evaluator([=](double x, double u, double v) {
    return 0.5 * v * v - lambda * u - amplitude * std::cos(two_pi * x);
  });
  m.Lambda = lambda;
  m.lambda_lower = lambda;
  m.discount = lambda;
  return m;
}

/// H0 = (p^2 + rho(u^3))/2. dH/du vanishes on u = 0, so the sup-norm decay is
/// only algebraic.
inline ContactModel counterexample() {
  ContactModel m;
  m.name = "counterexample";
  m.H = [](double, double u, double p) { return 0.5 * (p * p + rho_smooth(u * u * u)); };
  m.dH_dx = [](double, double, double) { return 0.0; };
  m.dH_du = [](double, double u, double) {
    return 1.5 * u * u * rho_smooth_derivative(u * u * u);
  };
  m.dH_dp = [](double, double, double p) { return p; };
  m.L_closed = Evaluator([](double, double u, double v) { return 0.5 * (v * v - rho_smooth(u * u * u)); });
  // dH/du vanishes outside u^3 in [-2,1]; take the sampled maximum with margin.
  double top = 0.0;
  for (int k = 0; k <= 20000; ++k) {
    double u = -1.3 + 2.4 * k / 20000.0;
    top = std::max(top, 1.5 * u * u * rho_smooth_derivative(u * u * u));
  }
  m.Lambda = 1.01 * top;
  m.lambda_lower = 0.0;
  m.known_stationary = [](double) { return 0.0; };
  return m;
}

/// Classical Hamiltonian h(x,p) = level + p^2/2 + A cos(2 pi x); dH/du = 0.
inline ContactModel frozen(double amplitude = 0.3, double level = 0.0) {
  ContactModel m;
  m.name = "frozen";
  m.H = [=](double x, double, double p) {
    return level + 0.5 * p * p + amplitude * std::cos(two_pi * x);
  };
  m.dH_dx = [=](double x, double, double) { return -two_pi * amplitude * std::sin(two_pi * x); };
  m.dH_du = [](double, double, double) { return 0.0; };
  m.dH_dp = [](double, double, double p) { return p; };
  m.L_closed = Evaluator([=](double x, double, double v) {
    return 0.5 * v * v - level - amplitude * std::cos(two_pi * x);
  });
  m.Lambda = 1.0;
  m.lambda_lower = 0.0;
  return m;
}

/// H = lambda*u - p^2: violates convexity in p. Negative control only.
inline ContactModel concave(double lambda = 1.0) {
  ContactModel m;
  m.name = "concave";
  m.H = [lambda](double, double u, double p) { return lambda * u - p * p; };
  m.dH_dx = [](double, double, double) { return 0.0; };
  m.dH_du = [lambda](double, double, double) { return lambda; };
  m.dH_dp = [](double, double, double p) { return -2.0 * p; };
  m.Lambda = lambda;
  m.lambda_lower = lambda;
  return m;
}

/// H + c. Stationary solutions of discounted models move by -c/lambda.
inline ContactModel shifted(ContactModel base, double c) {
  ContactModel m = base;
  m.name = base.name + "+shift";
  m.H = [H = base.H, c](double x, double u, double p) { return H(x, u, p) + c; };
  if (base.L_closed)
    m.L_closed = Evaluator([L = *base.L_closed, c](double x, double u, double v) { return L(x, u, v) - c; });
  if (base.discount && base.known_stationary)
    m.known_stationary = [f = *base.known_stationary, d = *base.discount, c](double x) {
      return f(x) - c / d;
    };
  else
    m.known_stationary.reset();
  return m;
}

/// Classical Hamiltonian h^a(x,p) = H(x,a,p) obtained by freezing u = a.
inline ContactModel frozen_at(const ContactModel &base, double a) {
  ContactModel m;
  m.name = base.name + "@u=" + format_real(a);
  m.H = [H = base.H, a](double x, double, double p) { return H(x, a, p); };
  m.dH_dx = [f = base.dH_dx, a](double x, double, double p) { return f(x, a, p); };
  m.dH_du = [](double, double, double) { return 0.0; };
  m.dH_dp = [f = base.dH_dp, a](double x, double, double p) { return f(x, a, p); };
  if (base.L_closed)
    m.L_closed = Evaluator([L = *base.L_closed, a](double x, double, double v) { return L(x, a, v); });
  m.Lambda = 1.0;
  m.lambda_lower = 0.0;
  m.p_box = base.p_box;
  return m;
}

/// lambda*u + h(x,p) for a classical (u-independent) model h.
inline ContactModel discounted(const ContactModel &classical, double lambda) {
  ContactModel m;
  m.name = classical.name + "/discount=" + format_real(lambda);
  m.H = [H = classical.H, lambda](double x, double u, double p) { return lambda * u + H(x, 0.0, p); };
  m.dH_dx = [f = classical.dH_dx](double x, double, double p) { return f(x, 0.0, p); };
  m.dH_du = [lambda](double, double, double) { return lambda; };
  m.dH_dp = [f = classical.dH_dp](double x, double, double p) { return f(x, 0.0, p); };
  if (classical.L_closed)
    m.L_closed = Evaluator([L = *classical.L_closed, lambda](double x, double u, double v) {
      return L(x, 0.0, v) - lambda * u;
    });
  m.Lambda = lambda;
  m.lambda_lower = lambda;
  m.discount = lambda;
  m.p_box = classical.p_box;
  return m;
}

} // namespace models

// ---------------------------------------------------------------------------
// Assumption checks.

struct SlabSpec {
  double u_box = 3.0;
  double p_box = 5.0;
  int x_samples = 16;
  int u_samples = 21; // odd so that u = 0 is sampled
  int p_samples = 41;
  /// H2 proxy: (H(x,u,+-p_box) - H(x,u,0)) / p_box must exceed this slope.
  double growth_slope = 1.0;
};

struct AssumptionCheck {
  std::string id;      // "H1", "H2" or "H3"
  std::string variant; // "strict" / "relaxed" for H3, "proxy" for H2
  double min = 0.0;
  double max = 0.0;
  bool pass = false;
  bool required = true;
};

struct ModelReport {
  std::vector<AssumptionCheck> checks;
  SlabSpec slab;

  const AssumptionCheck *find(const std::string &id, const std::string &variant = "") const {
    for (const auto &c : checks)
      if (c.id == id && (variant.empty() || c.variant == variant))
        return &c;
    return nullptr;
  }
  bool all_required_pass() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const AssumptionCheck &c) { return c.pass || !c.required; });
  }
};

/// Samples the slab |u| <= u_box, |p| <= p_box and reports (H1), the (H2)
/// growth proxy and (H3) with finite-difference dH/du.
inline ModelReport validate_assumptions(const ContactModel &m, const SlabSpec &slab) {
  if (!(slab.u_box > 0.0 && slab.p_box > 0.0) || slab.x_samples < 1 || slab.u_samples < 2 ||
      slab.p_samples < 2)
    throw Error("validate_assumptions: slab bounds must be positive");
  const double inf = std::numeric_limits<double>::infinity();
  double h1_min = inf, h1_max = -inf;
  double h2_min = inf, h2_max = -inf;
  double h3_min = inf, h3_max = -inf;
  const double dp = 1e-3 * std::max(1.0, slab.p_box / 10.0);
  const double du = 1e-5;
  for (int ix = 0; ix < slab.x_samples; ++ix) {
    double x = static_cast<double>(ix) / slab.x_samples;
    for (int iu = 0; iu < slab.u_samples; ++iu) {
      double u = -slab.u_box + 2.0 * slab.u_box * iu / (slab.u_samples - 1);
      double h0 = m.H(x, u, 0.0);
      for (double sgn : {-1.0, 1.0}) {
        double g = (m.H(x, u, sgn * slab.p_box) - h0) / slab.p_box;
        h2_min = std::min(h2_min, g);
        h2_max = std::max(h2_max, g);
      }
      for (int ip = 0; ip < slab.p_samples; ++ip) {
        double p = -slab.p_box + 2.0 * slab.p_box * ip / (slab.p_samples - 1);
        double hp = m.H(x, u, p);
        double second = (m.H(x, u, p + dp) - 2.0 * hp + m.H(x, u, p - dp)) / (dp * dp);
        h1_min = std::min(h1_min, second);
        h1_max = std::max(h1_max, second);
        double hu = (m.H(x, u + du, p) - m.H(x, u - du, p)) / (2.0 * du);
        h3_min = std::min(h3_min, hu);
        h3_max = std::max(h3_max, hu);
      }
    }
  }
  // Finite differences of exact values carry ~1e-10 noise; positivity is
  // judged against a threshold well above it.
  const double positive = 1e-6;
  const double upper = m.Lambda * (1.0 + 1e-6) + 1e-9;
  const bool strict_required = m.lambda_lower && *m.lambda_lower > 0.0;
  ModelReport r;
  r.slab = slab;
  r.checks.push_back({"H1", "strict", h1_min, h1_max, h1_min > positive, true});
  r.checks.push_back({"H2", "proxy", h2_min, h2_max, h2_min > slab.growth_slope, true});
  r.checks.push_back({"H3", "strict", h3_min, h3_max, h3_min > positive && h3_max <= upper,
                      strict_required});
  r.checks.push_back({"H3", "relaxed", h3_min, h3_max, h3_min >= -positive && h3_max <= upper,
                      !strict_required});
  return r;
}

/// Discounted surrogate lambda*(u - u_minus(x)) + H(x, u_minus(x), p), with
/// u_minus interpolated linearly between nodes.
inline ContactModel build_surrogate(const ContactModel &base, const GridFn &u_minus, double lambda) {
  if (!(lambda > 0.0))
    throw Error("build_surrogate: lambda must be positive");
  auto anchor = std::make_shared<const GridFn>(u_minus);
  ContactModel m;
  m.name = base.name + "/surrogate";
  m.H = [H = base.H, anchor, lambda](double x, double u, double p) {
    double a = anchor->interpolate(x);
    return lambda * (u - a) + H(x, a, p);
  };
  m.dH_dx = [b = base, anchor, lambda](double x, double, double p) {
    double a = anchor->interpolate(x);
    double da = anchor->cell_slope(x);
    return -lambda * da + b.dH_dx(x, a, p) + b.dH_du(x, a, p) * da;
  };
  m.dH_du = [lambda](double, double, double) { return lambda; };
  m.dH_dp = [f = base.dH_dp, anchor](double x, double, double p) {
    return f(x, anchor->interpolate(x), p);
  };
  if (base.L_closed)
    m.L_closed = Evaluator([L = *base.L_closed, anchor, lambda](double x, double u, double v) {
      double a = anchor->interpolate(x);
      return lambda * (a - u) + L(x, a, v);
    });
  m.Lambda = lambda;
  m.lambda_lower = lambda;
  m.discount = lambda;
  m.p_box = base.p_box;
  m.known_stationary = [anchor](double x) { return anchor->interpolate(x); };
  return m;
}

} // namespace contact_hj
