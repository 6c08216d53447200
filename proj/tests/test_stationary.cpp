#include <cmath>

#include <gtest/gtest.h>

#include "contact_hj/diagnostics.hpp"
#include "contact_hj/stationary.hpp"

using namespace contact_hj;

namespace {

GridFn sine(const TorusGrid &g) {
  return GridFn::sample(g, [](double x) { return std::sin(models::two_pi * x); });
}

} // namespace

TEST(SolveLongtime, QuadConvergesToZero) {
  TorusGrid g(64);
  auto r = solve_longtime(models::quad(1.0), sine(g), {}, 1e-10, 100.0);
  EXPECT_EQ(r.method, StationaryMethod::longtime);
  EXPECT_LE(r.u_minus.max(), 1e-9);
  EXPECT_GE(r.u_minus.min(), -1e-9);
  EXPECT_LT(r.residual, 1e-10);
}

TEST(SolveLongtime, BudgetExhaustionThrows) {
  TorusGrid g(64);
  EXPECT_THROW(solve_longtime(models::quad(1.0), sine(g), {}, 1e-12, 2.0), NotConverged);
  EXPECT_THROW(solve_longtime(models::quad(1.0), sine(g), {}, 0.0, 2.0), Error);
}

TEST(SolveDiscounted, QuadFixedPointIsZero) {
  auto r = solve_discounted(models::quad(1.0), 1e-10, DiscountedConfig{64});
  EXPECT_LE(std::max(r.u_minus.max(), -r.u_minus.min()), 1e-9);
  EXPECT_LE(r.residual, 1e-10);
}

TEST(SolveDiscounted, ConstantShiftMovesSolution) {
  const double K = 0.3;
  auto m = models::shifted(models::quad(1.0), -K);
  ASSERT_TRUE(m.discount.has_value());
  auto r = solve_discounted(m, 1e-10, DiscountedConfig{64});
  // Discrete fixed point of u = e^{-dt} u + dt K, within O(dt) of K.
  const double dt = 1.0 / 64.0, discrete = K * dt / (1.0 - std::exp(-dt));
  EXPECT_NEAR(r.u_minus.max(), discrete, 1e-9);
  EXPECT_NEAR(r.u_minus.min(), discrete, 1e-9);
  EXPECT_LE(std::fabs(discrete - K), K * dt);
}

TEST(SolveDiscounted, AgreesWithLongtimeOnMechanical) {
  const std::size_t n = 128;
  TorusGrid g(n);
  const auto m = models::mechanical(1.0, 0.3);
  EvolveConfig sl;
  sl.scheme = Scheme::semi_lagrangian;
  auto lt = solve_longtime(m, GridFn::constant(g, 0.0), sl, 1e-9, 200.0);
  auto dc = solve_discounted(m, 1e-9, DiscountedConfig{n});
  EXPECT_LE(sup_dist(lt.u_minus, dc.u_minus), 5.0 * g.spacing());
}

TEST(SolveDiscounted, DefectsContractGeometrically) {
  const auto m = models::mechanical(1.0, 0.3);
  DiscountedConfig cfg{64};
  std::vector<double> defects;
  solve_discounted(m, 1e-8, cfg, std::nullopt, &defects);
  ASSERT_GT(defects.size(), 10u);
  const double q = std::exp(-1.0 / 64.0);
  for (std::size_t k = 1; k < defects.size(); ++k) {
    if (defects[k - 1] > 1e-13) {
      EXPECT_LE(defects[k], q * defects[k - 1] * (1.0 + 1e-9) + 1e-15) << k;
    }
  }
}

TEST(SolveDiscounted, JetResidualSmallAtCornerCentralSlopeSmallAwayFromIt) {
  const std::size_t n = 128;
  TorusGrid g(n);
  const auto m = models::mechanical(1.0, 0.3);
  auto r = solve_discounted(m, 1e-10, DiscountedConfig{n});
  EXPECT_LE(jet_residual(m, r.u_minus, default_corner_tol(g)), 10.0 * g.spacing());
  double away = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double x = g.node(i);
    if (torus_dist(x, 0.5) < 0.1)
      continue;
    auto s = one_sided_slopes(r.u_minus, static_cast<long long>(i));
    away = std::max(away, std::fabs(m.H(x, r.u_minus[i], s.central())));
  }
  EXPECT_LE(away, 10.0 * g.spacing());
}

TEST(SolveDiscounted, RejectsNonDiscountedModels) {
  EXPECT_THROW(solve_discounted(models::counterexample(), 1e-6), NotDiscountedForm);
  TorusGrid g(64);
  EXPECT_THROW(discounted_bellman(models::frozen(), GridFn::constant(g, 0.0), 0.01, {4.0, 33}),
               NotDiscountedForm);
  EXPECT_THROW(solve_discounted(models::quad(), 1e-6, DiscountedConfig{64}, GridFn::constant(TorusGrid(32), 0.0)),
               GridMismatch);
}

TEST(CriticalValue, QuadFrozenLevel) {
  for (double a : {-0.3, 0.0, 0.4}) {
    auto r = critical_value(models::quad(1.0), a);
    EXPECT_NEAR(r.c, a, 1e-3) << a;
    EXPECT_EQ(r.ladder.size(), 4u);
    EXPECT_TRUE(r.ladder_monotone);
  }
}

TEST(CriticalValue, MechanicalEqualsPotentialMaximum) {
  auto r = critical_value(models::mechanical(1.0, 1.0), 0.0);
  EXPECT_NEAR(r.c, 1.0, 0.01);
  auto s = critical_value(models::shifted(models::mechanical(1.0, 1.0), 0.7), 0.0);
  EXPECT_NEAR(s.c - r.c, 0.7, 1e-3);
}

TEST(CriticalValue, LadderValidation) {
  EXPECT_THROW(critical_value(models::quad(), 0.0, {}), Error);
  EXPECT_THROW(critical_value(models::quad(), 0.0, {0.1, 0.2}), Error);
  EXPECT_THROW(critical_value(models::quad(), 0.0, {0.1, -0.1}), Error);
}

TEST(AdmissibleShift, QuadRootAtZero) {
  auto r = admissible_shift(models::quad(1.0), -0.5, 0.7, 0.005);
  EXPECT_NEAR(r.a, 0.0, 0.01);
  EXPECT_LT(std::fabs(r.c_at_a), 0.005);
}

TEST(AdmissibleShift, InvalidBracketThrows) {
  EXPECT_THROW(admissible_shift(models::quad(1.0), 0.2, 0.7, 0.005), BracketInvalid);
  EXPECT_THROW(admissible_shift(models::quad(1.0), 0.7, -0.5, 0.005), BracketInvalid);
}

TEST(DiscountedGap, DecaysAtDiscountRate) {
  TorusGrid g(64);
  const auto m = models::quad(1.0);
  auto s = discounted_gap(m, GridFn::constant(g, 1.0), GridFn::constant(g, 0.0), {0.0, 1.0, 2.0}, {});
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0].value, 1.0);
  EXPECT_NEAR(s[1].value, std::exp(-1.0), 2e-3);
  EXPECT_NEAR(s[2].value, std::exp(-2.0), 2e-3);
  EXPECT_THROW(discounted_gap(models::counterexample(), GridFn::constant(g, 1.0), GridFn::constant(g, 0.0),
                              {1.0}, {}),
               NotDiscountedForm);
}
