#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "contact_hj/models.hpp"

using namespace contact_hj;

TEST(EvalH, QuadDirectFormula) { EXPECT_DOUBLE_EQ(eval_H(models::quad(1.0), 0.3, 2.0, 1.0), 2.5); }

TEST(EvalH, CounterexampleOnIdentityBranch) {
  const auto m = models::counterexample();
  EXPECT_DOUBLE_EQ(eval_H(m, 0.7, -1.0, 0.0), -0.5);
  EXPECT_DOUBLE_EQ(eval_H(m, 0.1, 0.0, 2.0), 2.0);
}

TEST(LegendreL, QuadClosedForm) { EXPECT_DOUBLE_EQ(legendre_L(models::quad(1.0), 0.4, 2.0, 1.0), -1.5); }

TEST(LegendreL, MechanicalAtRest) {
  EXPECT_NEAR(legendre_L(models::mechanical(1.0, 1.0), 0.0, 0.0, 0.0), -1.0, 1e-14);
}

TEST(LegendreL, NumericMatchesClosedFormOnSlab) {
  for (const auto &m : {models::quad(1.0), models::mechanical(1.0, 0.3), models::counterexample(),
                        models::frozen(0.3, -0.3)}) {
    double worst = 0.0;
    for (int i = 0; i < 20; ++i)
      for (int j = 0; j < 20; ++j)
        for (int k = 0; k < 20; ++k) {
          double x = i / 20.0, u = -1.5 + 3.0 * j / 19.0, v = -5.0 + 10.0 * k / 19.0;
          worst = std::max(worst, std::fabs(legendre_L_numeric(m, x, u, v) - (*m.L_closed)(x, u, v)));
        }
    EXPECT_LE(worst, 1e-8) << m.name;
  }
}

TEST(LegendreL, InvolutionOnSampledMomenta) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(0.0, 1.0), uu(-1.0, 1.0), up(-10.0, 10.0);
  for (const auto &m : {models::quad(1.0), models::mechanical(1.0, 0.3), models::counterexample()}) {
    for (int k = 0; k < 300; ++k) {
      double x = ux(rng), u = uu(rng), p = up(rng);
      double v = m.dH_dp(x, u, p);
      EXPECT_NEAR(legendre_L_numeric(m, x, u, v), p * v - m.H(x, u, p), 1e-8);
    }
  }
}

TEST(LegendreL, UnreachableVelocityThrows) {
  auto m = models::quad(1.0);
  m.p_box = 2.0;
  EXPECT_THROW(legendre_L(m, 0.0, 0.0, 3.0), VelocityOutOfRange);
  EXPECT_THROW(legendre_L_numeric(m, 0.0, 0.0, -2.5), VelocityOutOfRange);
}

TEST(RhoSmooth, IdentityOnUnitInterval) {
  for (int k = 0; k < 100; ++k) {
    double s = -1.0 + k / 99.0;
    EXPECT_EQ(rho_smooth(s), s);
  }
  EXPECT_EQ(rho_smooth(-0.5), -0.5);
}

TEST(RhoSmooth, PlateausAndMonotone) {
  EXPECT_EQ(rho_smooth(5.0), rho_smooth(1.0));
  EXPECT_EQ(rho_smooth(1.0), 1.0);
  EXPECT_EQ(rho_smooth(-7.0), rho_smooth(-2.0));
  EXPECT_EQ(rho_smooth(-2.0), -2.0);
  double prev = rho_smooth(-3.0), max_slope = 0.0;
  for (int k = 1; k <= 6000; ++k) {
    double s = -3.0 + 5.0 * k / 6000.0;
    double r = rho_smooth(s);
    EXPECT_GE(r, prev - 1e-15);
    prev = r;
    max_slope = std::max(max_slope, rho_smooth_derivative(s));
    EXPECT_GE(rho_smooth_derivative(s), 0.0);
  }
  EXPECT_LT(max_slope, 10.0);
}

TEST(RhoSmooth, DerivativeMatchesFiniteDifference) {
  for (double s : {-1.9, -1.5, -1.2, 0.1, 0.5, 0.9}) {
    double fd = (rho_smooth(s + 1e-6) - rho_smooth(s - 1e-6)) / 2e-6;
    EXPECT_NEAR(rho_smooth_derivative(s), fd, 1e-6) << s;
  }
}

TEST(Partials, MatchFiniteDifferences) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ux(0.05, 0.95), uu(-1.2, 1.2), up(-3.0, 3.0);
  for (const auto &m : {models::quad(1.0), models::mechanical(1.0, 0.3), models::counterexample(),
                        models::frozen(0.3, 0.0)}) {
    for (int k = 0; k < 50; ++k) {
      double x = ux(rng), u = uu(rng), p = up(rng), e = 1e-6;
      EXPECT_NEAR(m.dH_dx(x, u, p), (m.H(x + e, u, p) - m.H(x - e, u, p)) / (2 * e), 1e-5) << m.name;
      EXPECT_NEAR(m.dH_du(x, u, p), (m.H(x, u + e, p) - m.H(x, u - e, p)) / (2 * e), 1e-5) << m.name;
      EXPECT_NEAR(m.dH_dp(x, u, p), (m.H(x, u, p + e) - m.H(x, u, p - e)) / (2 * e), 1e-5) << m.name;
    }
  }
}

TEST(ValidateAssumptions, QuadPassesWithConstantSlope) {
  auto r = validate_assumptions(models::quad(1.0), SlabSpec{3.0, 5.0});
  EXPECT_TRUE(r.all_required_pass());
  const auto *h3 = r.find("H3", "strict");
  ASSERT_NE(h3, nullptr);
  EXPECT_NEAR(h3->min, 1.0, 1e-8);
  EXPECT_NEAR(h3->max, 1.0, 1e-8);
  for (const auto &c : r.checks)
    EXPECT_TRUE(c.id == "H1" || c.id == "H2" || c.id == "H3");
}

TEST(ValidateAssumptions, CounterexampleOnlyRelaxedH3) {
  auto r = validate_assumptions(models::counterexample(), SlabSpec{});
  EXPECT_FALSE(r.find("H3", "strict")->pass);
  EXPECT_TRUE(r.find("H3", "relaxed")->pass);
  EXPECT_TRUE(r.all_required_pass());
}

TEST(ValidateAssumptions, ConcaveFailsH1) {
  auto r = validate_assumptions(models::concave(1.0), SlabSpec{});
  EXPECT_FALSE(r.find("H1")->pass);
  EXPECT_FALSE(r.all_required_pass());
}

TEST(BuildSurrogate, ExactForDiscountedModelWithItsSolution) {
  TorusGrid g(64);
  const auto m = models::quad(1.0);
  auto s = build_surrogate(m, GridFn::constant(g, 0.0), 1.0);
  for (double x : {0.0, 0.3, 0.77})
    for (double u : {-1.0, 0.5})
      for (double p : {-2.0, 0.0, 1.0})
        EXPECT_NEAR(s.H(x, u, p), u + 0.5 * p * p, 1e-12);
  EXPECT_EQ(s.dH_du(0.3, 1.0, 2.0), 1.0);
}

TEST(BuildSurrogate, AgreesOnAnchorGraph) {
  TorusGrid g(64);
  const auto m = models::mechanical(1.0, 0.3);
  GridFn anchor = GridFn::sample(g, [](double x) { return 0.2 * std::sin(models::two_pi * x); });
  auto s = build_surrogate(m, anchor, 2.0);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ux(0.0, 1.0), up(-3.0, 3.0);
  for (int k = 0; k < 100; ++k) {
    double x = ux(rng), p = up(rng), a = anchor.interpolate(x);
    EXPECT_NEAR(s.H(x, a, p), m.H(x, a, p), 1e-12);
  }
}

TEST(BuildSurrogate, RejectsNonPositiveLambda) {
  TorusGrid g(16);
  EXPECT_THROW(build_surrogate(models::quad(), GridFn::constant(g, 0.0), 0.0), Error);
}

TEST(Catalog, FrozenAndShiftedHelpers) {
  const auto m = models::mechanical(1.0, 1.0);
  auto h = models::frozen_at(m, -0.4);
  EXPECT_DOUBLE_EQ(h.H(0.0, 123.0, 0.0), -0.4 + 1.0);
  EXPECT_EQ(h.dH_du(0.0, 1.0, 1.0), 0.0);
  auto s = models::shifted(m, 0.7);
  EXPECT_DOUBLE_EQ(s.H(0.25, 0.1, 1.0), m.H(0.25, 0.1, 1.0) + 0.7);
  auto d = models::discounted(h, 0.2);
  EXPECT_DOUBLE_EQ(d.H(0.0, 2.0, 1.0), 0.4 + h.H(0.0, 0.0, 1.0));
  ASSERT_TRUE(d.discount.has_value());
  EXPECT_EQ(*d.discount, 0.2);
}
