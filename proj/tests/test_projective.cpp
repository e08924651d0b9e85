#include <gtest/gtest.h>

#include <cmath>

#include "schro/parallel.hpp"
#include "schro/projective.hpp"

using namespace schro;

TEST(Moebius, FixedPointsAreFixed) {
  for (double a : {1e-4, 1e-3, 0.1, 0.5}) {
    const auto fp = fixed_points(a);
    EXPECT_NEAR(moebius_apply({a}, fp.x_att), fp.x_att, 1e-13);
    EXPECT_NEAR(moebius_apply({a}, fp.x_rep), fp.x_rep, 1e-13);
    EXPECT_NEAR(fp.x_att * fp.x_rep, 1.0, 1e-13);
    EXPECT_GT(fp.x_att, 1.0);
    EXPECT_LT(fp.x_rep, 1.0);
  }
}

TEST(Moebius, AttractorContractsRepellerExpands) {
  const auto fp = fixed_points(0.1);
  EXPECT_LT(moebius_derivative({0.1}, fp.x_att), 1.0);
  EXPECT_GT(moebius_derivative({0.1}, fp.x_rep), 1.0);
}

TEST(Moebius, PolesReported) {
  EXPECT_THROW(moebius_apply({0.1}, 0.0), Error);
  EXPECT_THROW(moebius_inverse({0.1}, 2.1), Error);
  EXPECT_THROW(fixed_points(0.0), Error);
}

TEST(Admissibility, SmallLambdaAdmissibleLargeNot) {
  EXPECT_TRUE(lambda_admissible(0.1));
  EXPECT_TRUE(lambda_admissible(0.3));
  // both conditions vanish at one half, which is excluded
  EXPECT_FALSE(lambda_admissible(0.5));
  EXPECT_FALSE(lambda_admissible(0.8));
}

TEST(Covering, HoldsAtDeskParameters) {
  const auto rep = covering_check(0.1, 1e-3, 1e-3);
  EXPECT_TRUE(rep.holds());
  EXPECT_NO_THROW(require_covering(0.1, 1e-3, 1e-3));
}

TEST(Covering, FailsWhenDeltaSwallowsInterval) {
  const auto ti = trapping_intervals(0.1, 1e-3, 1e-3);
  EXPECT_TRUE(ti.in_I(ti.I_mid()));
  EXPECT_FALSE(covering_check(0.1, 1e-3, 0.5).holds());
  EXPECT_THROW(require_covering(0.1, 1e-3, 0.5), Error);
}

TEST(Orbits, PositiveOrbitsHaveBoundedSide) {
  const double lambda = 0.5;
  const std::int64_t h = 200;
  for (std::uint64_t r = 0; r < 50; ++r) {
    auto g = substream(17, r);
    std::vector<double> omega(2 * h + 1);
    for (double& w : omega) w = uniform01(g) < 0.5 ? 0.0 : lambda;
    const double x0 = std::exp(std::log(1e-2) + uniform01(g) * std::log(1e4));
    const auto c = classify_positive_orbit(lambda, omega, x0, h);
    EXPECT_NE(c.tag, OrbitCase::Unclassified);
    if (c.tag != OrbitCase::BelowRepContradiction) {
      EXPECT_TRUE(has_bounded_derivative(c.tag));
      EXPECT_TRUE(std::isfinite(c.derivative_bound));
    }
  }
}

TEST(Orbits, StartInsideTrapEntersImmediately) {
  const std::int64_t h = 10;
  std::vector<double> omega(2 * h + 1, 0.0);
  const auto c = classify_positive_orbit(0.5, omega, 1.2, h);
  EXPECT_EQ(c.tag, OrbitCase::EntersIForward);
  EXPECT_EQ(c.entry_index, 0);
}

TEST(Orbits, OmegaLengthChecked) {
  std::vector<double> omega(5, 0.0);
  EXPECT_THROW(classify_positive_orbit(0.5, omega, 1.0, 10), Error);
}
