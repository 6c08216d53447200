#pragma once

// Experiment driver: the convergence, properties and critical pipelines
// behind the contact-hj-lab command line tool.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "contact_hj/config.hpp"
#include "contact_hj/diagnostics.hpp"
#include "contact_hj/errors.hpp"
#include "contact_hj/evolve.hpp"
#include "contact_hj/flow.hpp"
#include "contact_hj/grid.hpp"
#include "contact_hj/jets.hpp"
#include "contact_hj/models.hpp"
#include "contact_hj/plot.hpp"
#include "contact_hj/series.hpp"
#include "contact_hj/stationary.hpp"

namespace contact_hj {

enum ExitCode : int { exit_ok = 0, exit_property_failure = 1, exit_config_error = 2, exit_solver_failure = 3 };

// ---------------------------------------------------------------------------
// Convergence.

struct SeriesFit {
  std::string series;
  std::optional<RateFit> fit; // empty when the window held too few samples
  double floor = 0.0;
  std::string note;
};

struct ConvergenceResult {
  std::string model;
  GridFn u_minus;
  std::string u_minus_source;
  /// max |H| over the 1-jets of u_minus.
  double stationary_residual = 0.0;
  double h = 0.0;
  EvolutionRun run;
  Series sup_error, hausdorff, residual;
  std::vector<SeriesFit> fits;
  double lambda_ref = 0.0;
  std::optional<KeyLemmaReport> key_lemma;

  const SeriesFit &fit(const std::string &name) const {
    for (const auto &f : fits)
      if (f.series == name)
        return f;
    throw Error("no fit for series " + name);
  }
};

namespace detail {

inline void ensure_dir(const std::string &dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw Error("cannot create output directory " + dir + ": " + ec.message());
}

inline StationaryResult compute_u_minus(const ContactModel &m, const ExperimentConfig &c, const GridFn &phi,
                                        std::string &source) {
  const TorusGrid &grid = phi.grid();
  StationarySource method = c.stationary.method;
  if (method == StationarySource::automatic)
    method = m.known_stationary ? StationarySource::known : StationarySource::longtime;
  switch (method) {
  case StationarySource::known: {
    if (!m.known_stationary)
      throw ConfigError("stationary.method = \"known\" but model " + m.name + " has no closed-form solution");
    source = "closed form";
    return {GridFn::sample(grid, *m.known_stationary), StationaryMethod::longtime, 0.0, 0};
  }
  case StationarySource::discounted: {
    DiscountedConfig dc;
    dc.n = grid.size();
    dc.dt = c.stationary.discounted_dt;
    dc.v_box = c.stationary.discounted_v_box;
    source = "discounted value iteration";
    return solve_discounted(m, c.stationary.tol, dc);
  }
  default: {
    EvolveConfig ec = c.evolve;
    ec.snapshot_times.clear();
    source = "long-time limit (" + to_string(ec.scheme) + ")";
    return solve_longtime(m, phi, ec, c.stationary.tol, c.stationary.t_max);
  }
  }
}

inline SeriesFit fit_series(const std::string &name, const Series &s, const RatesSpec &r, double scheme_error,
                            std::optional<RateKind> hint) {
  SeriesFit out;
  out.series = name;
  out.floor = r.floor_factor * scheme_error;
  try {
    out.fit = fit_rate(s, {r.t_min, r.t_max, out.floor}, hint);
  } catch (const InsufficientData &e) {
    out.note = e.what();
  } catch (const NonPositiveValues &e) {
    out.note = e.what();
  }
  return out;
}

inline Series fitted_curve(const RateFit &f, const Series &s) {
  Series out;
  for (const auto &q : s)
    if (q.t >= f.t_min && q.t <= f.t_max)
      out.push_back({q.t, f.kind == RateKind::exponential ? f.prefactor * std::exp(f.exponent * q.t)
                                                          : f.prefactor * std::pow(1.0 + q.t, f.exponent)});
  return out;
}

inline void plot_series(const std::string &path, const std::string &title, const std::string &label,
                        const Series &s, const SeriesFit &fit) {
  LogPlot p;
  p.title = title;
  p.y_label = label;
  p.lines.push_back({label, s, "#1f77b4", false});
  if (fit.fit) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s fit, exponent %.3f", to_string(fit.fit->kind).c_str(), fit.fit->exponent);
    p.lines.push_back({buf, fitted_curve(*fit.fit, s), "#d62728", true});
  }
  write_svg(p, path);
}

} // namespace detail

/// evolve -> stationary -> jets -> rates, writing every artifact into out_dir.
inline ConvergenceResult run_convergence(const ExperimentConfig &c, const std::string &out_dir) {
  const ContactModel m = make_model(c.model);
  const TorusGrid grid(c.n);
  const GridFn phi = make_initial(c.initial, grid);
  const double tol_corner = default_corner_tol(grid);

  std::string source;
  StationaryResult st = detail::compute_u_minus(m, c, phi, source);
  ConvergenceResult r{m.name, st.u_minus, source, 0.0, grid.spacing(), {}, {}, {}, {}, {}, 0.0, std::nullopt};
  r.stationary_residual = jet_residual(m, r.u_minus, tol_corner);

  r.run = evolve(m, phi, c.evolve);
  r.sup_error = sup_error_series(r.run, r.u_minus);
  r.hausdorff = hausdorff_series(r.run, r.u_minus, tol_corner);
  r.residual = hamiltonian_residual_series(m, r.run, tol_corner);

  // Scheme-error estimates: each diagnostic evaluated on the discrete
  // stationary state after one unit of time under the same scheme.
  EvolveConfig unit = c.evolve;
  unit.snapshot_times = {1.0};
  const GridFn settled = evolve(m, r.u_minus, unit).snapshots.back().u;
  const double sup_floor = sup_dist(settled, r.u_minus);
  const double haus_floor = hausdorff(extract_jets(settled, tol_corner), extract_jets(r.u_minus, tol_corner));

  r.fits.push_back(detail::fit_series("sup_error", r.sup_error, c.rates, sup_floor, c.rates.sup_kind));
  r.fits.push_back(detail::fit_series("hausdorff", r.hausdorff, c.rates, haus_floor, c.rates.hausdorff_kind));
  r.fits.push_back(
      detail::fit_series("residual", r.residual, c.rates, r.stationary_residual, c.rates.residual_kind));

  double u_lo = r.u_minus.min() - 1.0, u_hi = r.u_minus.max() + 1.0;
  double B = 0.0;
  for (const auto &s : r.residual)
    B = std::max(B, s.value);
  CompactSlab slab{u_lo, u_hi, std::max(2.0 * B, 1e-3), 16, 101, 801, 0.0};
  try {
    r.lambda_ref = lambda_estimate(m, slab);
  } catch (const EmptySlab &) {
    r.lambda_ref = std::numeric_limits<double>::quiet_NaN();
  }

  if (c.key_lemma.enabled) {
    KeyLemmaSampling ks;
    ks.samples = c.key_lemma.samples;
    ks.v_box = c.key_lemma.v_box;
    ks.seed = c.seed;
    r.key_lemma = key_lemma_check(m, r.u_minus, c.key_lemma.beta, ks);
  }

  detail::ensure_dir(out_dir);
  const std::string d = out_dir + "/";
  write_csv(r.sup_error, d + "sup_error.csv");
  write_csv(r.hausdorff, d + "hausdorff.csv");
  write_csv(r.residual, d + "residual.csv");
  write_csv(r.u_minus, d + "u_minus.csv");
  write_csv(extract_jets(r.u_minus, tol_corner, "u_minus"), d + "u_minus_jets.csv");
  detail::ensure_dir(d + "snapshots");
  write_run_csv(r.run, d + "snapshots");
  {
    std::ofstream os(d + "rates.csv");
    os << "series,kind,exponent,prefactor,r2,t_min,t_max,n\n";
    for (const auto &f : r.fits) {
      if (!f.fit)
        continue;
      os << f.series << ',';
      write_rate_row(os, *f.fit);
      os << '\n';
    }
  }
  detail::plot_series(d + "sup_error.svg", m.name + ": sup-norm error", "sup |u(t) - u_minus|", r.sup_error,
                      r.fit("sup_error"));
  detail::plot_series(d + "hausdorff.svg", m.name + ": Hausdorff distance of 1-jets", "d_H", r.hausdorff,
                      r.fit("hausdorff"));
  detail::plot_series(d + "residual.svg", m.name + ": Hamiltonian residual on 1-jets", "max |H|", r.residual,
                      r.fit("residual"));

  std::ofstream rep(d + "report.txt");
  rep << "model            " << m.name << '\n';
  rep << "grid             n=" << grid.size() << " h=" << format_real(grid.spacing()) << '\n';
  rep << "scheme           " << to_string(r.run.config.scheme) << " dt=" << format_real(r.run.config.dt) << '\n';
  rep << "u_minus          " << source << ", solver residual " << format_real(st.residual) << ", "
      << st.iterations << " iterations\n";
  rep << "stationary max|H| on 1-jets " << format_real(r.stationary_residual) << " (10h = "
      << format_real(10.0 * grid.spacing()) << ")\n";
  rep << "lambda(H) on slab u in [" << format_real(u_lo) << ", " << format_real(u_hi)
      << "], |H| <= " << format_real(slab.B) << ": " << format_real(r.lambda_ref) << '\n';
  rep << "reference rates  sup: exp(-" << format_real(r.lambda_ref) << " t), Hausdorff: exp(-"
      << format_real(r.lambda_ref / 3.0) << " t)\n\n";
  for (const auto &f : r.fits) {
    rep << f.series << ": ";
    if (!f.fit) {
      rep << "no fit (" << f.note << ")\n";
      continue;
    }
    rep << to_string(f.fit->kind) << " exponent " << format_real(f.fit->exponent) << ", r2 "
        << format_real(f.fit->r2) << ", window [" << format_real(f.fit->t_min) << ", " << format_real(f.fit->t_max)
        << "], " << f.fit->n_points << " points, floor " << format_real(f.floor) << '\n';
    if (f.fit->kind == RateKind::exponential && std::isfinite(r.lambda_ref) && r.lambda_ref > 0.0) {
      double ref = f.series == "hausdorff" ? r.lambda_ref / 3.0 : r.lambda_ref;
      rep << "    measured rate " << format_real(-f.fit->exponent) << " vs reference " << format_real(ref)
          << (-f.fit->exponent >= 0.9 * ref ? " (at least 90% of reference)" : " (below 90% of reference)")
          << '\n';
    }
  }
  if (r.key_lemma) {
    const auto &k = *r.key_lemma;
    rep << "\nkey lemma check: beta " << format_real(k.beta) << ", alpha " << format_real(k.alpha) << ", delta "
        << format_real(k.delta) << ", violations " << k.violations << " (near " << k.near_violations << ", far "
        << k.far_violations << ") over " << k.samples << " samples\n";
  }
  return r;
}

// ---------------------------------------------------------------------------
// Properties.

struct PropertyRow {
  std::string name;
  std::string verdict; // pass, fail or skip
  double margin = 0.0;
  std::string note;
};

struct PropertiesResult {
  std::string model;
  std::vector<PropertyRow> rows;

  bool all_pass() const {
    return std::none_of(rows.begin(), rows.end(), [](const PropertyRow &r) { return r.verdict == "fail"; });
  }
  const PropertyRow *find(const std::string &name) const {
    for (const auto &r : rows)
      if (r.name == name)
        return &r;
    return nullptr;
  }
};

namespace detail {

/// Smooth random datum: offset plus three Fourier modes.
inline GridFn random_smooth(const TorusGrid &grid, std::mt19937_64 &rng, double scale = 1.0) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double c0 = 0.5 * scale * unit(rng);
  double a[3], b[3];
  for (int k = 0; k < 3; ++k) {
    a[k] = 0.5 * scale * unit(rng) / (k + 1);
    b[k] = std::numbers::pi * unit(rng);
  }
  return GridFn::sample(grid, [&](double x) {
    double v = c0;
    for (int k = 0; k < 3; ++k)
      v += a[k] * std::sin(models::two_pi * (k + 1) * x + b[k]);
    return v;
  });
}

inline bool x_independent(const ContactModel &m) {
  for (int i = 0; i < 16; ++i)
    for (double u : {-1.0, 0.0, 0.7})
      for (double p : {-2.0, 0.0, 1.5})
        if (m.dH_dx(i / 16.0, u, p) != 0.0)
          return false;
  return true;
}

inline bool u_independent(const ContactModel &m) {
  for (int i = 0; i < 16; ++i)
    for (double u : {-1.0, 0.0, 0.7})
      for (double p : {-2.0, 0.0, 1.5})
        if (m.dH_du(i / 16.0, u, p) != 0.0)
          return false;
  return true;
}

inline std::string csv_safe(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

} // namespace detail

/// Runs the seeded property suites for the configured model.
inline PropertiesResult run_properties(const ExperimentConfig &c, const std::string &out_dir) {
  const ContactModel m = make_model(c.model);
  const PropertiesSpec &ps = c.properties;
  const TorusGrid grid(ps.n);
  const double h = grid.spacing();
  PropertiesResult res{m.name, {}};
  auto add = [&](std::string name, bool pass, double margin, std::string note = {}) {
    res.rows.push_back({std::move(name), pass ? "pass" : "fail", margin, std::move(note)});
  };
  auto skip = [&](std::string name, std::string note) { res.rows.push_back({std::move(name), "skip", 0.0, note}); };
  auto guarded = [&](const std::string &name, auto &&body) {
    try {
      body();
    } catch (const Error &e) {
      add(name, false, -std::numeric_limits<double>::infinity(), e.what());
    }
  };
  std::mt19937_64 rng(c.seed);
  const bool lambda_positive = m.lambda_lower && *m.lambda_lower > 0.0;

  // models
  const ModelReport report = validate_assumptions(m, SlabSpec{});
  for (const auto &chk : report.checks) {
    std::string name = "models." + chk.id + (chk.id == "H3" ? "_" + chk.variant : "");
    double margin = chk.id == "H2" ? chk.min - SlabSpec{}.growth_slope : chk.min;
    if (!chk.required)
      res.rows.push_back({name, "skip", margin,
                          "informational; sampled min " + format_real(chk.min) +
                              (chk.pass ? " (holds)" : " (does not hold)")});
    else
      add(name, chk.pass, margin, "sampled range [" + format_real(chk.min) + "; " + format_real(chk.max) + "]");
  }
  guarded("models.legendre_involution", [&] {
    std::uniform_real_distribution<double> ux(0.0, 1.0), uu(-1.0, 1.0), up(-0.5 * m.p_box, 0.5 * m.p_box);
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
      double x = ux(rng), u = uu(rng), p = up(rng);
      double v = m.dH_dp(x, u, p);
      worst = std::max(worst, std::fabs(legendre_L_numeric(m, x, u, v) - (p * v - m.H(x, u, p))));
    }
    add("models.legendre_involution", worst <= 1e-8, 1e-8 - worst, "max error " + format_real(worst));
  });

  // evolve
  EvolveConfig lf;
  guarded("evolve.monotonicity", [&] {
    double worst = 0.0, worst_comp = 0.0;
    for (std::size_t k = 0; k < ps.pairs; ++k) {
      GridFn phi = detail::random_smooth(grid, rng);
      GridFn bump = detail::random_smooth(grid, rng);
      std::vector<double> up(phi.values().begin(), phi.values().end());
      for (std::size_t i = 0; i < up.size(); ++i)
        up[i] += std::fabs(bump[i]);
      GridFn psi(grid, std::move(up));
      auto rep = check_semigroup_props(m, phi, psi, ps.t, lf);
      worst = std::max(worst, rep.order_violation);
      worst_comp = std::max(worst_comp, rep.composition_residual);
    }
    add("evolve.monotonicity", worst <= 1e-12, 1e-12 - worst,
        std::to_string(ps.pairs) + " ordered pairs; max (T phi - T psi)+ = " + format_real(worst));
    add("evolve.composition", worst_comp <= 1e-12, 1e-12 - worst_comp,
        "max |T_t phi - T_(t-s) T_s phi| = " + format_real(worst_comp));
  });
  guarded("evolve.nonexpansive", [&] {
    double worst_excess = -std::numeric_limits<double>::infinity();
    double min_margin = std::numeric_limits<double>::infinity();
    double worst_discount = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < ps.pairs; ++k) {
      GridFn phi = detail::random_smooth(grid, rng), psi = detail::random_smooth(grid, rng);
      auto rep = check_semigroup_props(m, phi, psi, ps.t, lf);
      worst_excess = std::max(worst_excess, rep.gap_out - rep.gap_in);
      min_margin = std::min(min_margin, rep.contraction_margin);
      if (m.discount)
        worst_discount =
            std::min(worst_discount, std::exp(-*m.discount * ps.t) * rep.gap_in + 5.0 * h - rep.gap_out);
    }
    add("evolve.nonexpansive", worst_excess <= 1e-12, 1e-12 - worst_excess,
        std::to_string(ps.pairs) + " random pairs");
    if (lambda_positive)
      add("evolve.strict_contraction", min_margin > 0.0, min_margin,
          "min |phi - psi| - |T phi - T psi| at t = " + format_real(ps.t));
    else
      skip("evolve.strict_contraction", "lambda_lower = 0");
    if (m.discount)
      add("evolve.discounted_contraction", worst_discount >= 0.0, worst_discount,
          "|T phi - T psi| <= exp(-lambda t) |phi - psi| + 5h");
    else
      skip("evolve.discounted_contraction", "model is not in discounted form");
  });
  if (detail::x_independent(m)) {
    guarded("evolve.constant_preservation", [&] {
      double worst = 0.0;
      std::uniform_real_distribution<double> level(-1.0, 1.0);
      for (Scheme s : {Scheme::lax_friedrichs, Scheme::semi_lagrangian}) {
        EvolveConfig ec;
        ec.scheme = s;
        GridFn u = evolve_to(m, GridFn::constant(grid, level(rng)), ps.t, ec);
        worst = std::max(worst, u.max() - u.min());
      }
      add("evolve.constant_preservation", worst <= 1e-12, 1e-12 - worst, "both schemes");
    });
  } else {
    skip("evolve.constant_preservation", "H depends on x");
  }

  // stationary
  if (lambda_positive) {
    guarded("stationary.uniqueness", [&] {
      const double tol = 1e-8;
      std::vector<GridFn> sols;
      for (std::size_t k = 0; k < ps.uniqueness_starts; ++k)
        sols.push_back(solve_longtime(m, detail::random_smooth(grid, rng), lf, tol, 400.0).u_minus);
      double worst = 0.0;
      for (std::size_t a = 0; a < sols.size(); ++a)
        for (std::size_t b = a + 1; b < sols.size(); ++b)
          worst = std::max(worst, sup_dist(sols[a], sols[b]));
      double bound = 10.0 * std::max(tol, h);
      add("stationary.uniqueness", worst <= bound, bound - worst,
          std::to_string(sols.size()) + " random starts; max pairwise gap " + format_real(worst));
    });
  } else {
    skip("stationary.uniqueness", "lambda_lower = 0");
  }

  // flow
  guarded("flow.energy_sandwich", [&] {
    std::uniform_real_distribution<double> ux(0.0, 1.0), uu(-1.0, 1.0), up(-2.0, 2.0);
    double worst = 0.0;
    for (std::size_t k = 0; k < ps.trajectories; ++k) {
      PhasePoint z{ux(rng), uu(rng), up(rng)};
      auto tr = integrate(m, z, 0.0, ps.trajectory_t, 1e-3);
      worst = std::max(worst, energy_profile(m, tr).max_violation);
    }
    add("flow.energy_sandwich", worst <= 1e-6, 1e-6 - worst,
        std::to_string(ps.trajectories) + " random initial conditions");
  });

  if (detail::u_independent(m)) {
    guarded("flow.energy_conservation", [&] {
      std::uniform_real_distribution<double> ux(0.0, 1.0), uu(-1.0, 1.0), up(-2.0, 2.0);
      double worst = 0.0;
      for (std::size_t k = 0; k < ps.trajectories; ++k) {
        PhasePoint z{ux(rng), uu(rng), up(rng)};
        auto tr = integrate(m, z, 0.0, ps.trajectory_t, 1e-3);
        const double h0 = m.H(z.x, z.u, z.p);
        for (const auto &s : tr.samples)
          worst = std::max(worst, std::fabs(m.H(s.z.x, s.z.u, s.z.p) - h0));
      }
      add("flow.energy_conservation", worst <= 1e-8, 1e-8 - worst, "dH/du = 0: max |H(t) - H(0)|");
    });
  }

  // jets
  guarded("jets.hausdorff_metric", [&] {
    std::uniform_real_distribution<double> ux(0.0, 1.0), uv(-1.0, 1.0);
    auto cloud = [&] {
      JetCloud cl;
      for (int k = 0; k < 12; ++k)
        cl.points.push_back({ux(rng), uv(rng), uv(rng), JetKind::smooth, 0});
      return cl;
    };
    double worst = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < 100; ++k) {
      JetCloud a = cloud(), b = cloud(), e = cloud();
      double ab = hausdorff(a, b);
      worst = std::max({worst, std::fabs(ab - hausdorff(b, a)), ab - hausdorff(a, e) - hausdorff(e, b)});
    }
    add("jets.hausdorff_metric", worst <= 1e-12, 1e-12 - worst, "symmetry and triangle inequality");
  });

  // diagnostics
  guarded("diagnostics.fenchel_young", [&] {
    GridFn u = detail::random_smooth(grid, rng);
    const double tol_corner = default_corner_tol(grid);
    std::uniform_int_distribution<std::size_t> node(0, grid.size() - 1);
    std::uniform_real_distribution<double> uv(-4.0, 4.0);
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < ps.fenchel_samples; ++k) {
      std::size_t i = node(rng);
      double v = uv(rng);
      double top = -std::numeric_limits<double>::infinity();
      for (double p : reachable_differentials(u, static_cast<long long>(i), tol_corner))
        top = std::max(top, m.H(grid.node(i), u[i], p));
      worst = std::min(worst, l_u_eval(m, u, static_cast<long long>(i), v, tol_corner) + top);
    }
    add("diagnostics.fenchel_young", worst >= -1e-9, worst + 1e-9, "l_u >= -max H over D*u");
  });

  detail::ensure_dir(out_dir);
  std::ofstream os(out_dir + "/properties.csv");
  os << "name,verdict,margin,note\n";
  for (const auto &r : res.rows)
    os << r.name << ',' << r.verdict << ',' << format_real(r.margin) << ',' << detail::csv_safe(r.note) << '\n';
  return res;
}

// ---------------------------------------------------------------------------
// Critical value.

struct CriticalRunResult {
  CriticalValueResult critical;
  std::optional<AdmissibleShift> shift;
};

inline CriticalConfig critical_config(const CriticalSpec &s) {
  CriticalConfig cc;
  cc.discounted.n = s.n;
  cc.discounted.dt = s.dt;
  cc.discounted.v_box = s.v_box;
  return cc;
}

inline CriticalRunResult run_critical(const ExperimentConfig &c, const std::string &out_dir) {
  const ContactModel m = make_model(c.model);
  const CriticalSpec &s = c.critical;
  if (!s.bracket)
    throw ConfigError("critical.bracket is required");
  const CriticalConfig cc = critical_config(s);
  CriticalRunResult r{critical_value(m, s.a_freeze, s.ladder, cc), std::nullopt};

  detail::ensure_dir(out_dir);
  write_csv(r.critical, out_dir + "/critical_ladder.csv");
  std::ofstream rep(out_dir + "/report.txt");
  rep << "model            " << m.name << '\n';
  rep << "frozen at u =    " << format_real(s.a_freeze) << " (" << r.critical.h_id << ")\n";
  rep << "c(h^a)           " << format_real(r.critical.c) << '\n';
  rep << "ladder_monotone  " << (r.critical.ladder_monotone ? "true" : "false") << '\n';
  rep.flush();

  r.shift = admissible_shift(m, s.bracket->first, s.bracket->second, s.tol, s.ladder, cc);
  std::ofstream os(out_dir + "/admissible_shift.csv");
  os << "a_star,c_at_a_star,evaluations\n";
  os << format_real(r.shift->a) << ',' << format_real(r.shift->c_at_a) << ',' << r.shift->evaluations << '\n';
  rep << "a*               " << format_real(r.shift->a) << " (c(h^a*) = " << format_real(r.shift->c_at_a) << ", "
      << r.shift->evaluations << " critical-value evaluations)\n";
  return r;
}

// ---------------------------------------------------------------------------
// Entry point shared by the executable and the tests.

inline int run_command(const std::string &command, const std::string &config_path,
                       const std::optional<std::string> &out_override, const std::optional<std::int64_t> &seed,
                       std::ostream &log, std::ostream &err) {
  try {
    ExperimentConfig c = load_config(config_path);
    if (seed) {
      if (*seed < 0)
        throw ConfigError("--seed must be nonnegative");
      c.seed = static_cast<std::uint64_t>(*seed);
    }
    const std::string out = out_override ? *out_override : c.output_dir;
    if (command == "convergence") {
      auto r = run_convergence(c, out);
      for (const auto &f : r.fits)
        if (f.fit)
          log << f.series << ": " << to_string(f.fit->kind) << " exponent " << format_real(f.fit->exponent)
              << " (r2 " << format_real(f.fit->r2) << ")\n";
      log << "wrote " << out << "/report.txt\n";
      return exit_ok;
    }
    if (command == "properties") {
      auto r = run_properties(c, out);
      for (const auto &row : r.rows)
        log << row.verdict << "  " << row.name << "  " << row.note << '\n';
      log << "wrote " << out << "/properties.csv\n";
      return r.all_pass() ? exit_ok : exit_property_failure;
    }
    if (command == "critical") {
      auto r = run_critical(c, out);
      log << "c(h^a) = " << format_real(r.critical.c) << ", a* = " << format_real(r.shift->a) << '\n';
      return exit_ok;
    }
    err << "unknown command '" << command << "' (expected convergence, properties or critical)\n";
    return exit_config_error;
  } catch (const ConfigError &e) {
    err << "config error: " << e.what() << '\n';
    return exit_config_error;
  } catch (const CflViolation &e) {
    err << "config error: " << e.what() << '\n';
    return exit_config_error;
  } catch (const Error &e) {
    err << "solver failure: " << e.what() << '\n';
    return exit_solver_failure;
  }
}

} // namespace contact_hj
