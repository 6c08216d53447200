#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "contact_hj/evolve.hpp"
#include "contact_hj/models.hpp"

using namespace contact_hj;

namespace {

GridFn sine(const TorusGrid &g) {
  return GridFn::sample(g, [](double x) { return std::sin(models::two_pi * x); });
}

GridFn random_smooth(const TorusGrid &g, std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  double c = 0.5 * d(rng), a = 0.5 * d(rng), b = 0.25 * d(rng), s = 3.0 * d(rng);
  return GridFn::sample(g, [&](double x) {
    return c + a * std::sin(models::two_pi * x + s) + b * std::cos(2 * models::two_pi * x);
  });
}

} // namespace

TEST(StepLf, ConstantDataFollowsLinearOde) {
  TorusGrid g(64);
  const auto m = models::quad(1.0);
  GridFn u = GridFn::constant(g, 2.0);
  const double dt = 1e-3;
  for (int k = 0; k < 1000; ++k)
    u = step_lf(m, u, dt, 1.0 / 64.0);
  EXPECT_NEAR(u[0], 2.0 * std::exp(-1.0), 1e-3 * 2.0);
  EXPECT_EQ(u.max() - u.min(), 0.0);
}

TEST(StepLf, CounterexampleSingleStep) {
  TorusGrid g(64);
  const double dt = 0.01;
  auto u = step_lf(models::counterexample(), GridFn::constant(g, -1.0), dt, 1.0);
  EXPECT_DOUBLE_EQ(u[7], -1.0 + dt / 2.0);
}

TEST(StepLf, PreservesOrderingAndRejectsCflViolation) {
  TorusGrid g(128);
  const auto m = models::mechanical(1.0, 0.3);
  std::mt19937_64 rng(2);
  const double theta = 8.0, dt = 0.5 / (theta / g.spacing() + m.Lambda);
  for (int k = 0; k < 20; ++k) {
    GridFn phi = random_smooth(g, rng);
    std::vector<double> up(phi.values().begin(), phi.values().end());
    for (auto &v : up)
      v += 0.1;
    GridFn psi(g, up);
    auto a = step_lf(m, phi, dt, theta), b = step_lf(m, psi, dt, theta);
    for (std::size_t i = 0; i < g.size(); ++i)
      EXPECT_LE(a[i], b[i]);
  }
  EXPECT_THROW(step_lf(m, sine(g), 1.0, theta), CflViolation);
}

TEST(StepSl, ConstantMatchesLfToFirstOrder) {
  TorusGrid g(64);
  const auto m = models::quad(1.0);
  const double dt = 1e-3;
  auto sl = step_sl(m, GridFn::constant(g, 1.5), dt, {1.0, 129});
  auto lf = step_lf(m, GridFn::constant(g, 1.5), dt, 1.0);
  EXPECT_NEAR(sl[3], lf[3], 1e-9);
  EXPECT_NEAR(sl[3], 1.5 - dt * 1.5, 1e-9);
}

TEST(StepSl, RequiresSmallLambdaStep) {
  TorusGrid g(32);
  EXPECT_THROW(step_sl(models::quad(2.0), GridFn::constant(g, 0.0), 0.5, {1.0, 33}), CflViolation);
}

TEST(StepSl, VelocityWindowBeyondMomentumBoxThrows) {
  TorusGrid g(32);
  auto m = models::quad(1.0);
  m.p_box = 1.0;
  EXPECT_THROW(step_sl(m, GridFn::constant(g, 0.0), 0.01, {2.0, 33}), VelocityOutOfRange);
}

TEST(Evolve, ZeroTimeIsIdentity) {
  TorusGrid g(64);
  for (Scheme s : {Scheme::lax_friedrichs, Scheme::semi_lagrangian}) {
    EvolveConfig c;
    c.scheme = s;
    c.snapshot_times = {0.0};
    auto run = evolve(models::mechanical(), sine(g), c);
    EXPECT_EQ(sup_dist(run.snapshots[0].u, sine(g)), 0.0);
    EXPECT_EQ(run.snapshots[0].t, 0.0);
  }
}

TEST(Evolve, QuadConstantDecaysLikeExponential) {
  TorusGrid g(64);
  EvolveConfig c;
  c.snapshot_times = {3.0};
  auto run = evolve(models::quad(1.0), GridFn::constant(g, 1.0), c);
  EXPECT_NEAR(run.snapshots[0].u[0], std::exp(-3.0), 1e-3);
}

TEST(Evolve, CounterexampleClosedForm) {
  TorusGrid g(64);
  EvolveConfig c;
  for (int t = 0; t <= 100; ++t)
    c.snapshot_times.push_back(t);
  auto run = evolve(models::counterexample(), GridFn::constant(g, -1.0), c);
  ASSERT_EQ(run.snapshots.size(), 101u);
  for (const auto &s : run.snapshots) {
    EXPECT_LE(s.u.max() - s.u.min(), 1e-12);
    EXPECT_NEAR(s.u[0], -1.0 / std::sqrt(1.0 + s.t), 5e-3);
  }
}

TEST(Evolve, SnapshotTimesRoundedToStep) {
  TorusGrid g(32);
  EvolveConfig c;
  c.snapshot_times = {0.1, 0.55, 1.0};
  auto run = evolve(models::quad(), sine(g), c);
  for (std::size_t k = 0; k < 3; ++k)
    EXPECT_LE(std::fabs(run.snapshots[k].t - c.snapshot_times[k]), 0.5 * run.config.dt + 1e-15);
  c.snapshot_times = {1.0, 0.5};
  EXPECT_THROW(evolve(models::quad(), sine(g), c), Error);
}

TEST(Evolve, ConstantPreservationBothSchemes) {
  TorusGrid g(64);
  for (const auto &m : {models::quad(1.0), models::counterexample()}) {
    for (Scheme s : {Scheme::lax_friedrichs, Scheme::semi_lagrangian}) {
      EvolveConfig c;
      c.scheme = s;
      auto u = evolve_to(m, GridFn::constant(g, -0.6), 1.0, c);
      EXPECT_LE(u.max() - u.min(), 1e-12) << m.name;
    }
  }
}

TEST(CrossScheme, GapSmallAndShrinking) {
  const auto m = models::quad(1.0);
  double gaps[2];
  int k = 0;
  for (std::size_t n : {128u, 256u}) {
    TorusGrid g(n);
    EvolveConfig lf, sl;
    sl.scheme = Scheme::semi_lagrangian;
    gaps[k++] = sup_dist(evolve_to(m, sine(g), 1.0, lf), evolve_to(m, sine(g), 1.0, sl));
  }
  EXPECT_LE(gaps[1], 0.05);
  EXPECT_GE(gaps[0] / gaps[1], 1.5);
}

TEST(SemigroupProps, QuadConstantsContractByExp) {
  TorusGrid g(64);
  auto r = check_semigroup_props(models::quad(1.0), GridFn::constant(g, 0.0), GridFn::constant(g, 1.0), 1.0, {});
  EXPECT_TRUE(r.ordered);
  EXPECT_TRUE(r.monotone);
  EXPECT_TRUE(r.nonexpansive);
  EXPECT_NEAR(r.gap_out, std::exp(-1.0), 2e-3);
  EXPECT_EQ(r.gap_in, 1.0);
  EXPECT_EQ(r.composition_residual, 0.0);
}

TEST(SemigroupProps, IdenticalDataGiveZeroGaps) {
  TorusGrid g(64);
  auto r = check_semigroup_props(models::mechanical(), sine(g), sine(g), 1.0, {});
  EXPECT_EQ(r.gap_in, 0.0);
  EXPECT_EQ(r.gap_out, 0.0);
  EXPECT_EQ(r.composition_residual, 0.0);
}

TEST(SemigroupProps, RandomPairsMonotoneNonexpansiveStrict) {
  TorusGrid g(128);
  std::mt19937_64 rng(42);
  const auto m = models::mechanical(1.0, 0.3);
  for (int k = 0; k < 20; ++k) {
    GridFn phi = random_smooth(g, rng), bump = random_smooth(g, rng);
    std::vector<double> up(phi.values().begin(), phi.values().end());
    for (std::size_t i = 0; i < up.size(); ++i)
      up[i] += std::fabs(bump[i]);
    auto r = check_semigroup_props(m, phi, GridFn(g, up), 1.0, {});
    EXPECT_TRUE(r.ordered);
    EXPECT_LE(r.order_violation, 1e-12);
    EXPECT_LE(r.gap_out, r.gap_in + 1e-12);
    EXPECT_GT(r.contraction_margin, 0.0);
  }
  EXPECT_THROW(check_semigroup_props(m, sine(g), sine(TorusGrid(64)), 1.0, {}), GridMismatch);
}

TEST(SemigroupProps, DiscountedSurrogateContraction) {
  TorusGrid g(128);
  std::mt19937_64 rng(8);
  GridFn anchor = GridFn::sample(g, [](double x) { return 0.1 * std::cos(models::two_pi * x); });
  const double lambda = 0.5;
  auto m = build_surrogate(models::mechanical(1.0, 0.3), anchor, lambda);
  for (int k = 0; k < 10; ++k) {
    auto r = check_semigroup_props(m, random_smooth(g, rng), random_smooth(g, rng), 1.0, {});
    EXPECT_LE(r.gap_out, std::exp(-lambda) * r.gap_in + 5.0 * g.spacing());
  }
}

TEST(WriteRunCsv, ManifestAndSnapshots) {
  TorusGrid g(16);
  EvolveConfig c;
  c.snapshot_times = {0.0, 0.5};
  auto run = evolve(models::quad(), GridFn::constant(g, 1.0), c);
  auto dir = std::filesystem::temp_directory_path() / "contact_hj_run_csv";
  std::filesystem::create_directories(dir);
  write_run_csv(run, dir.string());
  std::ifstream is(dir / "snapshots.csv");
  std::string header, first;
  std::getline(is, header);
  std::getline(is, first);
  EXPECT_EQ(header, "t,filename,sup_norm");
  EXPECT_EQ(first, "0,snapshot_0000.csv,1");
  EXPECT_TRUE(std::filesystem::exists(dir / "snapshot_0001.csv"));
}
