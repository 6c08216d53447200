#pragma once

// Experiment configuration: TOML schema, validation and the model/initial-data
// factories it refers to.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <toml.hpp>

#include "contact_hj/diagnostics.hpp"
#include "contact_hj/errors.hpp"
#include "contact_hj/evolve.hpp"
#include "contact_hj/grid.hpp"
#include "contact_hj/models.hpp"
#include "contact_hj/stationary.hpp"

namespace contact_hj {

struct ModelSpec {
  std::string name = "quad";
  double lambda = 1.0;
  double amplitude = 0.3;
  double level = 0.0;
};

enum class InitialKind { constant, sine, file };

struct InitialSpec {
  InitialKind kind = InitialKind::constant;
  double value = 1.0;     // constant level, or offset of the sine
  double amplitude = 1.0; // sine
  int frequency = 1;      // sine
  std::string path;       // file, resolved against the config directory
};

enum class StationarySource { automatic, known, longtime, discounted };

struct StationarySpec {
  StationarySource method = StationarySource::automatic;
  double tol = 1e-10;
  double t_max = 400.0;
  double discounted_dt = 0.0;
  double discounted_v_box = 4.0;
};

struct RatesSpec {
  double t_min = 2.0;
  double t_max = std::numeric_limits<double>::infinity();
  /// Samples below floor_factor x (diagnostic evaluated on u_minus) are
  /// treated as discretization floor.
  double floor_factor = 10.0;
  std::optional<RateKind> sup_kind, hausdorff_kind, residual_kind;
};

struct KeyLemmaSpec {
  bool enabled = true;
  double beta = 0.5;
  std::size_t samples = 10000;
  double v_box = 4.0;
};

struct CriticalSpec {
  double a_freeze = 0.0;
  std::optional<std::pair<double, double>> bracket;
  double tol = 0.005;
  std::vector<double> ladder = default_ladder();
  std::size_t n = 64;
  double dt = 0.05;
  double v_box = 4.0;
};

struct PropertiesSpec {
  std::size_t pairs = 200;
  std::size_t n = 128;
  double t = 1.0;
  std::size_t trajectories = 100;
  double trajectory_t = 5.0;
  std::size_t uniqueness_starts = 5;
  std::size_t fenchel_samples = 1000;
};

struct ExperimentConfig {
  ModelSpec model;
  std::size_t n = 128;
  EvolveConfig evolve;
  InitialSpec initial;
  RatesSpec rates;
  StationarySpec stationary;
  KeyLemmaSpec key_lemma;
  CriticalSpec critical;
  PropertiesSpec properties;
  std::string output_dir = "out";
  std::uint64_t seed = 1;
};

inline ContactModel make_model(const ModelSpec &s) {
  if (s.name == "quad")
    return models::quad(s.lambda);
  if (s.name == "mechanical")
    return models::mechanical(s.lambda, s.amplitude);
  if (s.name == "counterexample")
    return models::counterexample();
  if (s.name == "frozen")
    return models::frozen(s.amplitude, s.level);
  if (s.name == "concave")
    return models::concave(s.lambda);
  throw ConfigError("unknown model '" + s.name + "' (expected quad, mechanical, counterexample, frozen, concave)");
}

inline GridFn make_initial(const InitialSpec &s, const TorusGrid &grid) {
  switch (s.kind) {
  case InitialKind::constant:
    return GridFn::constant(grid, s.value);
  case InitialKind::sine:
    return GridFn::sample(grid, [&](double x) {
      return s.value + s.amplitude * std::sin(models::two_pi * s.frequency * x);
    });
  case InitialKind::file: {
    GridFn f = [&] {
      try {
        return read_csv(s.path);
      } catch (const Error &e) {
        throw ConfigError(std::string("initial data file: ") + e.what());
      }
    }();
    if (!(f.grid() == grid))
      throw ConfigError("initial data file " + s.path + " has " + std::to_string(f.size()) +
                        " nodes, grid has " + std::to_string(grid.size()));
    return f;
  }
  }
  throw ConfigError("unknown initial data kind");
}

namespace detail {

class TableReader {
public:
  TableReader(const toml::table *t, std::string path) : t_(t), path_(std::move(path)) {}

  bool present() const { return t_ != nullptr; }

  template <class T> std::optional<T> get(const std::string &key) {
    seen_.insert(key);
    if (!t_)
      return std::nullopt;
    const toml::node *n = t_->get(key);
    if (!n)
      return std::nullopt;
    if constexpr (std::is_same_v<T, double>) {
      if (auto v = n->value<double>())
        return *v;
    } else if constexpr (std::is_same_v<T, std::int64_t>) {
      if (auto v = n->value<std::int64_t>())
        return *v;
    } else if constexpr (std::is_same_v<T, bool>) {
      if (auto v = n->value<bool>())
        return *v;
    } else {
      if (auto v = n->value<std::string>())
        return *v;
    }
    throw ConfigError(where(key) + " has the wrong type");
  }

  double number(const std::string &key, double fallback) { return get<double>(key).value_or(fallback); }

  std::int64_t integer(const std::string &key, std::int64_t fallback) {
    return get<std::int64_t>(key).value_or(fallback);
  }

  std::optional<std::vector<double>> numbers(const std::string &key) {
    seen_.insert(key);
    if (!t_)
      return std::nullopt;
    const toml::node *n = t_->get(key);
    if (!n)
      return std::nullopt;
    const toml::array *a = n->as_array();
    if (!a)
      throw ConfigError(where(key) + " must be an array of numbers");
    std::vector<double> out;
    for (const auto &e : *a) {
      auto v = e.value<double>();
      if (!v)
        throw ConfigError(where(key) + " must contain only numbers");
      out.push_back(*v);
    }
    return out;
  }

  /// Rejects keys that were never requested, so typos do not pass silently.
  void finish() const {
    if (!t_)
      return;
    for (const auto &[k, v] : *t_)
      if (!seen_.count(std::string(k.str())))
        throw ConfigError("unknown key " + where(std::string(k.str())));
  }

  std::string where(const std::string &key) const { return path_.empty() ? key : path_ + "." + key; }

private:
  const toml::table *t_;
  std::string path_;
  std::set<std::string> seen_;
};

inline std::optional<RateKind> parse_kind(const std::optional<std::string> &s, const std::string &key) {
  if (!s || *s == "auto")
    return std::nullopt;
  if (*s == "exponential")
    return RateKind::exponential;
  if (*s == "power")
    return RateKind::power;
  throw ConfigError(key + " must be exponential, power or auto");
}

inline void require(bool ok, const std::string &msg) {
  if (!ok)
    throw ConfigError(msg);
}

} // namespace detail

/// Parses and validates a TOML experiment file. Relative file paths inside
/// the file are resolved against its directory.
inline ExperimentConfig parse_config(const toml::table &root, const std::filesystem::path &base_dir = {}) {
  using detail::require;
  using detail::TableReader;
  ExperimentConfig c;
  auto sub = [&](const char *name) -> const toml::table * {
    const toml::node *n = root.get(name);
    if (!n)
      return nullptr;
    if (!n->as_table())
      throw ConfigError(std::string("[") + name + "] must be a table");
    return n->as_table();
  };

  {
    std::set<std::string> known{"model",     "grid",     "scheme",     "initial", "snapshots", "rates",
                                "stationary", "key_lemma", "critical", "properties", "output",   "seed"};
    for (const auto &[k, v] : root)
      if (!known.count(std::string(k.str())))
        throw ConfigError("unknown top-level key " + std::string(k.str()));
  }
  if (const toml::node *s = root.get("seed")) {
    auto v = s->value<std::int64_t>();
    require(v && *v >= 0, "seed must be a nonnegative integer");
    c.seed = static_cast<std::uint64_t>(*v);
  }

  {
    TableReader r(sub("model"), "model");
    require(r.present(), "missing [model] table");
    auto name = r.get<std::string>("name");
    require(name.has_value(), "model.name is required");
    c.model.name = *name;
    c.model.lambda = r.number("lambda", c.model.lambda);
    c.model.amplitude = r.number("amplitude", c.model.amplitude);
    c.model.level = r.number("level", c.model.level);
    r.finish();
    require(c.model.lambda > 0.0, "model.lambda must be positive");
    make_model(c.model);
  }
  {
    TableReader r(sub("grid"), "grid");
    auto n = r.integer("n", static_cast<std::int64_t>(c.n));
    r.finish();
    require(n >= 16, "grid.n must be at least 16");
    c.n = static_cast<std::size_t>(n);
  }
  {
    TableReader r(sub("scheme"), "scheme");
    auto name = r.get<std::string>("name").value_or("lax_friedrichs");
    if (name == "lax_friedrichs")
      c.evolve.scheme = Scheme::lax_friedrichs;
    else if (name == "semi_lagrangian")
      c.evolve.scheme = Scheme::semi_lagrangian;
    else
      throw ConfigError("scheme.name must be lax_friedrichs or semi_lagrangian");
    c.evolve.dt = r.number("dt", 0.0);
    c.evolve.cfl_safety = r.number("cfl_safety", c.evolve.cfl_safety);
    if (auto th = r.get<double>("theta"))
      c.evolve.theta = *th;
    c.evolve.theta_min = r.number("theta_min", c.evolve.theta_min);
    c.evolve.theta_refresh = static_cast<int>(r.integer("theta_refresh", c.evolve.theta_refresh));
    c.evolve.v_box = r.number("v_box", 0.0);
    c.evolve.v_samples = static_cast<int>(r.integer("v_samples", c.evolve.v_samples));
    c.evolve.inner_fixpoint_iters = static_cast<int>(r.integer("inner_fixpoint_iters", 0));
    r.finish();
    require(c.evolve.dt >= 0.0, "scheme.dt must be nonnegative (0 selects automatically)");
    require(c.evolve.cfl_safety > 0.0 && c.evolve.cfl_safety <= 1.0, "scheme.cfl_safety must lie in (0,1]");
    require(!c.evolve.theta || *c.evolve.theta > 0.0, "scheme.theta must be positive");
    require(c.evolve.v_samples >= 3, "scheme.v_samples must be at least 3");
    require(c.evolve.inner_fixpoint_iters >= 0, "scheme.inner_fixpoint_iters must be nonnegative");
  }
  {
    TableReader r(sub("initial"), "initial");
    auto kind = r.get<std::string>("kind").value_or("constant");
    if (kind == "constant") {
      c.initial.kind = InitialKind::constant;
    } else if (kind == "sine") {
      c.initial.kind = InitialKind::sine;
      c.initial.value = 0.0;
    } else if (kind == "file") {
      c.initial.kind = InitialKind::file;
    } else {
      throw ConfigError("initial.kind must be constant, sine or file");
    }
    c.initial.value = r.number("value", c.initial.value);
    c.initial.amplitude = r.number("amplitude", c.initial.amplitude);
    c.initial.frequency = static_cast<int>(r.integer("frequency", c.initial.frequency));
    if (auto p = r.get<std::string>("path")) {
      std::filesystem::path fp(*p);
      if (fp.is_relative() && !base_dir.empty())
        fp = base_dir / fp;
      c.initial.path = fp.string();
    }
    r.finish();
    if (c.initial.kind == InitialKind::file) {
      require(!c.initial.path.empty(), "initial.path is required for kind = \"file\"");
      require(std::filesystem::exists(c.initial.path), "initial data file not found: " + c.initial.path);
    }
  }
  {
    TableReader r(sub("snapshots"), "snapshots");
    auto times = r.numbers("times");
    auto t_end = r.get<double>("t_end");
    auto every = r.get<double>("every");
    r.finish();
    if (times) {
      require(!t_end && !every, "snapshots: give either times or t_end/every, not both");
      c.evolve.snapshot_times = *times;
    } else {
      double end = t_end.value_or(10.0), step = every.value_or(0.5);
      require(end > 0.0 && step > 0.0, "snapshots.t_end and snapshots.every must be positive");
      const long long count = std::llround(end / step);
      for (long long k = 0; k <= count; ++k)
        c.evolve.snapshot_times.push_back(static_cast<double>(k) * step);
    }
    require(!c.evolve.snapshot_times.empty(), "snapshots: empty time list");
    for (std::size_t k = 0; k < c.evolve.snapshot_times.size(); ++k)
      require(c.evolve.snapshot_times[k] >= 0.0 &&
                  (k == 0 || c.evolve.snapshot_times[k] > c.evolve.snapshot_times[k - 1]),
              "snapshots.times must be nonnegative and strictly increasing");
  }
  {
    TableReader r(sub("rates"), "rates");
    c.rates.t_min = r.number("t_min", c.rates.t_min);
    c.rates.t_max = r.number("t_max", c.rates.t_max);
    c.rates.floor_factor = r.number("floor_factor", c.rates.floor_factor);
    c.rates.sup_kind = detail::parse_kind(r.get<std::string>("sup_kind"), "rates.sup_kind");
    c.rates.hausdorff_kind = detail::parse_kind(r.get<std::string>("hausdorff_kind"), "rates.hausdorff_kind");
    c.rates.residual_kind = detail::parse_kind(r.get<std::string>("residual_kind"), "rates.residual_kind");
    r.finish();
    require(c.rates.t_min < c.rates.t_max, "rates.t_min must be below rates.t_max");
    require(c.rates.floor_factor >= 0.0, "rates.floor_factor must be nonnegative");
  }
  {
    TableReader r(sub("stationary"), "stationary");
    auto m = r.get<std::string>("method").value_or("auto");
    if (m == "auto")
      c.stationary.method = StationarySource::automatic;
    else if (m == "known")
      c.stationary.method = StationarySource::known;
    else if (m == "longtime")
      c.stationary.method = StationarySource::longtime;
    else if (m == "discounted")
      c.stationary.method = StationarySource::discounted;
    else
      throw ConfigError("stationary.method must be auto, known, longtime or discounted");
    c.stationary.tol = r.number("tol", c.stationary.tol);
    c.stationary.t_max = r.number("t_max", c.stationary.t_max);
    c.stationary.discounted_dt = r.number("discounted_dt", c.stationary.discounted_dt);
    c.stationary.discounted_v_box = r.number("discounted_v_box", c.stationary.discounted_v_box);
    r.finish();
    require(c.stationary.tol > 0.0, "stationary.tol must be positive");
    require(c.stationary.t_max > 0.0, "stationary.t_max must be positive");
    require(c.stationary.discounted_v_box > 0.0, "stationary.discounted_v_box must be positive");
  }
  {
    TableReader r(sub("key_lemma"), "key_lemma");
    c.key_lemma.enabled = r.get<bool>("enabled").value_or(c.key_lemma.enabled);
    c.key_lemma.beta = r.number("beta", c.key_lemma.beta);
    c.key_lemma.samples = static_cast<std::size_t>(r.integer("samples", 10000));
    c.key_lemma.v_box = r.number("v_box", c.key_lemma.v_box);
    r.finish();
    require(c.key_lemma.beta > 0.0, "key_lemma.beta must be positive");
    require(c.key_lemma.samples > 0, "key_lemma.samples must be positive");
    require(c.key_lemma.v_box > 0.0, "key_lemma.v_box must be positive");
  }
  {
    TableReader r(sub("critical"), "critical");
    c.critical.a_freeze = r.number("a_freeze", c.critical.a_freeze);
    if (auto b = r.numbers("bracket")) {
      require(b->size() == 2, "critical.bracket must have two entries");
      c.critical.bracket = std::make_pair((*b)[0], (*b)[1]);
    }
    c.critical.tol = r.number("tol", c.critical.tol);
    if (auto l = r.numbers("ladder"))
      c.critical.ladder = *l;
    c.critical.n = static_cast<std::size_t>(r.integer("n", static_cast<std::int64_t>(c.critical.n)));
    c.critical.dt = r.number("dt", c.critical.dt);
    c.critical.v_box = r.number("v_box", c.critical.v_box);
    r.finish();
    require(c.critical.tol > 0.0, "critical.tol must be positive");
    require(c.critical.n >= 16, "critical.n must be at least 16");
    require(c.critical.dt > 0.0 && c.critical.v_box > 0.0, "critical.dt and critical.v_box must be positive");
    require(!c.critical.ladder.empty(), "critical.ladder must be nonempty");
    for (std::size_t k = 0; k < c.critical.ladder.size(); ++k)
      require(c.critical.ladder[k] > 0.0 && (k == 0 || c.critical.ladder[k] < c.critical.ladder[k - 1]),
              "critical.ladder must be positive and strictly decreasing");
  }
  {
    TableReader r(sub("properties"), "properties");
    auto count = [&](const char *key, std::size_t fallback) {
      auto v = r.integer(key, static_cast<std::int64_t>(fallback));
      require(v > 0, std::string("properties.") + key + " must be positive");
      return static_cast<std::size_t>(v);
    };
    c.properties.pairs = count("pairs", c.properties.pairs);
    c.properties.n = count("n", c.properties.n);
    c.properties.t = r.number("t", c.properties.t);
    c.properties.trajectories = count("trajectories", c.properties.trajectories);
    c.properties.trajectory_t = r.number("trajectory_t", c.properties.trajectory_t);
    c.properties.uniqueness_starts = count("uniqueness_starts", c.properties.uniqueness_starts);
    c.properties.fenchel_samples = count("fenchel_samples", c.properties.fenchel_samples);
    r.finish();
    require(c.properties.n >= 16, "properties.n must be at least 16");
    require(c.properties.t > 0.0 && c.properties.trajectory_t > 0.0, "properties times must be positive");
  }
  {
    TableReader r(sub("output"), "output");
    c.output_dir = r.get<std::string>("dir").value_or(c.output_dir);
    r.finish();
  }
  return c;
}

inline ExperimentConfig load_config(const std::string &path) {
  if (!std::filesystem::exists(path))
    throw ConfigError("config file not found: " + path);
  toml::table root;
  try {
    root = toml::parse_file(path);
  } catch (const toml::parse_error &e) {
    throw ConfigError("cannot parse " + path + ": " + std::string(e.description()));
  }
  return parse_config(root, std::filesystem::path(path).parent_path());
}

inline ExperimentConfig parse_config_string(std::string_view text) {
  try {
    return parse_config(toml::parse(text));
  } catch (const toml::parse_error &e) {
    throw ConfigError("cannot parse config: " + std::string(e.description()));
  }
}

} // namespace contact_hj
