#include <gtest/gtest.h>

#include <cmath>

#include "schro/parallel.hpp"
#include "schro/transfer_cocycle.hpp"

using namespace schro;

namespace {

RealizationWindow random_window(std::uint64_t seed, std::int64_t lo, std::int64_t hi, double lambda) {
  auto g = substream(seed, 0);
  std::vector<double> v(static_cast<std::size_t>(hi - lo + 1));
  for (double& x : v) x = uniform01(g) < 0.5 ? 0.0 : lambda;
  return RealizationWindow::from_potential(lo, std::move(v));
}

}  // namespace

TEST(Cocycle, StepMatrixIsUnimodular) {
  EXPECT_EQ(step_matrix(1.3, 0.4).det(), 1.0);
  const Mat2 p = step_matrix(0.7, -0.2) * step_inverse(0.7, -0.2);
  EXPECT_EQ(p, (Mat2{1.0, 0.0, 0.0, 1.0}));
}

TEST(Cocycle, EmptyProductIsIdentity) {
  const auto w = random_window(1, -5, 5, 1.0);
  EXPECT_EQ(product_over(0.5, w, 0, 0), Mat2{});
}

TEST(Cocycle, NegativeLengthInvertsPositive) {
  const auto w = random_window(2, -10, 10, 1.0);
  const Mat2 fwd = product_over(0.9, w, -3, 6);
  const Mat2 back = product_over(0.9, w, 3, -6);
  EXPECT_LT((back * fwd).max_abs_diff(Mat2{}), 1e-12);
}

TEST(Cocycle, OutOfWindowRejected) {
  const auto w = random_window(3, 0, 4, 1.0);
  EXPECT_THROW(product_over(0.0, w, 3, 5), Error);
}

TEST(Propagate, SolvesTheRecurrence) {
  const auto w = random_window(4, -20, 20, 0.8);
  const double E = 1.1;
  const auto s = propagate(E, w, 0.3, 1.0);
  std::vector<double> u(s.values.begin(), s.values.end());
  const auto res = recurrence_residuals(E, w, u);
  for (double r : res) EXPECT_LT(std::abs(r), 1e-9);
}

TEST(Witness, FreeEnergyInsideBandHasWitness) {
  const auto w = RealizationWindow::constant(-100, 100, 0.0);
  WitnessParams p;
  p.K = 1.5;
  p.N = 4;
  p.min_count = 1;
  EXPECT_TRUE(witness_search(1.0, w, p).witness.has_value());
}

TEST(Witness, EnergyFarOutsideBandHasNone) {
  const auto w = RealizationWindow::constant(-100, 100, 0.0);
  WitnessParams p;
  p.K = 1.5;
  p.N = 4;
  p.min_count = 1;
  EXPECT_FALSE(witness_search(3.0, w, p).witness.has_value());
}

TEST(Witness, BadParametersRejected) {
  const auto w = RealizationWindow::constant(-10, 10, 0.0);
  WitnessParams p;
  p.N = 0;
  EXPECT_THROW(witness_search(0.0, w, p), Error);
}

TEST(Lyapunov, PositiveOutsideFreeBand) {
  const PotentialSampler zero = [](std::mt19937_64&) { return 0.0; };
  EXPECT_NEAR(lyapunov_estimate(3.0, zero, 2000, 1), std::acosh(1.5), 1e-2);
}

TEST(Cone, RampExpandsConeVectors) {
  const auto rep = cone_check(0.0, 0.0, 5.0, 2000, 9);
  EXPECT_TRUE(rep.passed());
  EXPECT_EQ(rep.samples, 2000u);
}

TEST(Cone, PreconditionEnforced) { EXPECT_THROW(cone_check(0.0, 0.0, 1.0, 10, 0), Error); }
