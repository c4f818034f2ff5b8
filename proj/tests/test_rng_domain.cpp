#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "rsco/domain.hpp"
#include "rsco/rng.hpp"

using namespace rsco;

TEST(CounterRng, SameKeySameStream) {
  CounterRng a(7), b(7);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(CounterRng, DerivedSeedsDiffer) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t c = 0; c < 20; ++c)
    for (std::uint64_t t = 0; t < 20; ++t) seen.insert(derive_seed(99, c, t));
  EXPECT_EQ(seen.size(), 400u);
  EXPECT_NE(derive_seed(1, 2, 3), derive_seed(1, 3, 2));
}

TEST(CounterRng, UniformMomentsAndRange) {
  CounterRng rng(3);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sq += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.005);
  EXPECT_NEAR(sq / n, 1.0 / 3.0, 0.005);
}

TEST(CounterRng, NormalMatchesGaussianCdf) {
  CounterRng rng(11);
  std::vector<double> x(100000);
  for (auto& v : x) v = rng.normal();
  const double ks = oracle::ks_statistic(x, [](double t) { return 0.5 * std::erfc(-t / std::sqrt(2.0)); });
  EXPECT_LT(ks, 0.01);
}

TEST(CounterRng, BelowIsUnbiased) {
  CounterRng rng(5);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[rng.below(7)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(FeasibleDomain, BallProjectionExample) {
  const auto ball = FeasibleDomain::ball(Vector::Zero(2), 1.0);
  const Vector p = ball.project(Vector{{3.0, 4.0}});
  EXPECT_NEAR(p[0], 0.6, 1e-15);
  EXPECT_NEAR(p[1], 0.8, 1e-15);
}

TEST(FeasibleDomain, BoxProjectionExample) {
  const auto box = FeasibleDomain::box(Vector::Zero(2), Vector::Ones(2));
  const Vector p = box.project(Vector{{2.0, 0.5}});
  EXPECT_EQ(p, (Vector{{1.0, 0.5}}));
}

TEST(FeasibleDomain, InteriorPointsAreFixed) {
  const auto ball = FeasibleDomain::ball(Vector{{1.0, -2.0, 0.5}}, 2.0);
  const auto box = FeasibleDomain::box(Vector{{1.0, -2.0, 0.5}}, Vector{{1.0, 2.0, 3.0}});
  const Vector y{{1.3, -2.7, 1.1}};
  EXPECT_EQ(ball.project(y), y);
  EXPECT_EQ(box.project(y), y);
}

TEST(FeasibleDomain, Diameter) {
  EXPECT_DOUBLE_EQ(FeasibleDomain::ball_with_diameter(5, 2.0).diameter(), 2.0);
  EXPECT_DOUBLE_EQ(FeasibleDomain::ball(Vector::Zero(3), 1.5).diameter(), 3.0);
  EXPECT_DOUBLE_EQ(FeasibleDomain::box(Vector::Zero(2), Vector{{3.0, 4.0}}).diameter(), 10.0);
}

TEST(FeasibleDomain, RejectsDegenerateShapes) {
  EXPECT_THROW(FeasibleDomain::ball(Vector::Zero(2), 0.0), InvalidArgument);
  EXPECT_THROW(FeasibleDomain::box(Vector::Zero(2), Vector{{1.0, -1.0}}), InvalidArgument);
}

TEST(FeasibleDomain, ObtuseAngleProperty) {
  CounterRng rng(21);
  for (const auto& dom : {FeasibleDomain::ball(Vector{{0.5, -1.0, 2.0}}, 1.5),
                          FeasibleDomain::box(Vector{{0.5, -1.0, 2.0}}, Vector{{0.3, 1.0, 2.0}})}) {
    for (int k = 0; k < 10000; ++k) {
      const Vector y = dom.center() + 4.0 * rng.normal_vector(3);
      const Vector w = dom.project(dom.center() + 3.0 * rng.normal_vector(3));
      const Vector p = dom.project(y);
      ASSERT_TRUE(dom.contains(p));
      ASSERT_GE((p - y).dot(w - p), -1e-10);
    }
  }
}

TEST(FeasibleDomain, ProjectionIsNearest) {
  CounterRng rng(8);
  const auto box = FeasibleDomain::box(Vector::Zero(2), Vector{{1.0, 0.5}});
  for (int k = 0; k < 200; ++k) {
    const Vector y = 3.0 * rng.normal_vector(2);
    const Vector p = box.project(y);
    for (int j = 0; j < 50; ++j) {
      const Vector w = box.project(2.0 * rng.normal_vector(2));
      ASSERT_LE((p - y).norm(), (w - y).norm() + 1e-12);
    }
  }
}
