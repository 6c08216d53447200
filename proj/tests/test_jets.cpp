#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "contact_hj/jets.hpp"
#include "contact_hj/models.hpp"

using namespace contact_hj;

namespace {

GridFn tent(const TorusGrid &g) {
  return GridFn::sample(g, [](double x) { return -std::fabs(x - 0.5); });
}

JetCloud cloud(std::initializer_list<JetPoint> pts) {
  JetCloud c;
  c.points = pts;
  return c;
}

} // namespace

TEST(ExtractJets, SmoothSineHasOneJetPerNode) {
  TorusGrid g(256);
  auto f = GridFn::sample(g, [](double x) { return std::sin(models::two_pi * x) / models::two_pi; });
  auto c = extract_jets(f);
  ASSERT_EQ(c.size(), g.size());
  for (const auto &q : c.points) {
    EXPECT_EQ(q.kind, JetKind::smooth);
    EXPECT_NEAR(q.p, std::cos(models::two_pi * q.x), 1e-3);
  }
}

TEST(ExtractJets, TentKeepsBothSlopesAtKinks) {
  TorusGrid g(64);
  auto c = extract_jets(tent(g));
  EXPECT_EQ(c.size(), g.size() + 2);
  std::size_t corners = 0, convex = 0;
  for (const auto &q : c.points) {
    if (q.kind == JetKind::corner) {
      ++corners;
      EXPECT_EQ(q.x, 0.5);
      EXPECT_DOUBLE_EQ(std::fabs(q.p), 1.0);
    } else if (q.kind == JetKind::convex_kink) {
      ++convex;
      EXPECT_EQ(q.x, 0.0);
    }
  }
  EXPECT_EQ(corners, 2u);
  EXPECT_EQ(convex, 2u);
}

TEST(ExtractJets, ConstantAndValidation) {
  TorusGrid g(32);
  auto c = extract_jets(GridFn::constant(g, 1.0));
  ASSERT_EQ(c.size(), 32u);
  for (const auto &q : c.points)
    EXPECT_EQ(q.p, 0.0);
  EXPECT_THROW(extract_jets(GridFn::constant(g, 1.0), 0.0), Error);
}

TEST(ExtractJets, PointCountBetweenNAndTwoN) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    TorusGrid g(64);
    std::vector<double> v(g.size());
    for (auto &x : v)
      x = d(rng);
    auto c = extract_jets(GridFn(g, v));
    EXPECT_GE(c.size(), g.size());
    EXPECT_LE(c.size(), 2 * g.size());
  }
}

TEST(DirectionalDerivative, TentCornerTakesLowerSlope) {
  TorusGrid g(64);
  auto f = tent(g);
  const long long i = static_cast<long long>(g.nearest_node(0.5));
  const double tol = default_corner_tol(g);
  EXPECT_DOUBLE_EQ(directional_derivative(f, i, 2.0, tol), -2.0);
  EXPECT_DOUBLE_EQ(directional_derivative(f, i, -2.0, tol), -2.0);
  EXPECT_DOUBLE_EQ(directional_derivative(f, 5, 1.0, tol), 1.0);
}

TEST(DirectionalDerivative, PeriodicSumVanishes) {
  TorusGrid g(256);
  auto f = GridFn::sample(g, [](double x) { 
    return (std::sin(models::two_pi * x) + 0.03 * std::cos(3 * models::two_pi * x)) / models::two_pi;
  });
  double total = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    total += directional_derivative(f, static_cast<long long>(i), 1.0, default_corner_tol(g)) * g.spacing();
  EXPECT_NEAR(total, 0.0, 1e-12);
}

TEST(JetMetric, FlatSumWithWraparound) {
  EXPECT_DOUBLE_EQ(jet_metric({0.0, 0.0, 0.0}, {0.5, 0.25, 0.25}), 1.0);
  EXPECT_NEAR(jet_metric({0.9, 1.0, 2.0}, {0.1, 1.0, 2.0}), 0.2, 1e-15);
}

TEST(Hausdorff, ExamplesAndMetricAxioms) {
  auto a = cloud({{0.0, 0.0, 0.0}});
  auto b = cloud({{0.0, 0.0, 0.0}, {0.0, 0.0, 0.5}});
  EXPECT_DOUBLE_EQ(hausdorff(a, b), 0.5);
  EXPECT_EQ(hausdorff(b, b), 0.0);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  auto random_cloud = [&] {
    JetCloud c;
    for (int k = 0; k < 20; ++k)
      c.points.push_back({d(rng), d(rng), d(rng)});
    return c;
  };
  for (int k = 0; k < 50; ++k) {
    auto x = random_cloud(), y = random_cloud(), z = random_cloud();
    EXPECT_EQ(hausdorff(x, y), hausdorff(y, x));
    EXPECT_LE(hausdorff(x, z), hausdorff(x, y) + hausdorff(y, z) + 1e-12);
  }
  EXPECT_THROW(hausdorff(a, JetCloud{}), EmptyCloud);
}
