#include <gtest/gtest.h>

#include <cmath>

#include "schro/halfline_weyl.hpp"
#include "schro/parallel.hpp"

using namespace schro;

namespace {

HalfLineWindow bernoulli(std::uint64_t seed, std::int64_t L, double lambda) {
  auto g = substream(seed, 0);
  std::vector<double> v(static_cast<std::size_t>(L + 1));
  for (double& x : v) x = uniform01(g) < 0.5 ? 0.0 : lambda;
  return HalfLineWindow(0, std::move(v));
}

}  // namespace

TEST(MFunction, FreeValueAtThree) {
  const HalfLineWindow hl(0, std::vector<double>(2001, 0.0));
  EXPECT_NEAR(m_function(hl, 3.0), -0.381966, 1e-6);
  EXPECT_NEAR(m_function(hl, 3.0), free_m_function(3.0), 1e-12);
}

TEST(MFunction, ThreePathsAgree) {
  const auto hl = bernoulli(3, 500, 1.0);
  for (double z : {3.2, 4.0, 7.5, -2.5}) {
    const double a = m_function_solve<double>(hl, z);
    EXPECT_NEAR(a, m_function_cf<double>(hl, z), 1e-12);
    EXPECT_NEAR(a, m_function_ratio<double>(hl, z), 1e-12);
  }
}

TEST(MFunction, ComplexArgumentHasPositiveImaginaryPart) {
  const auto hl = bernoulli(4, 200, 1.0);
  const auto m = m_function(hl, std::complex<double>(0.5, 0.1));
  EXPECT_GT(m.imag(), 0.0);
}

TEST(MFunction, EigenvalueGuard) {
  const HalfLineWindow hl(0, {0.0, 0.0, 0.0});
  // eigenvalues of the 3-site free truncation: 0, +-sqrt 2
  EXPECT_THROW(m_function(hl, 0.0), Error);
}

TEST(MFunction, NegativeAndIncreasingAboveSpectrum) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto hl = bernoulli(s, 400, 1.0);
    const double top = top_eigenvalue(hl.truncation());
    std::vector<double> grid;
    for (int i = 1; i <= 20; ++i) grid.push_back(top + 0.05 * i);
    EXPECT_TRUE(negativity_monotonicity_scan(hl, grid).passed());
  }
}

TEST(MFunction, ScanRejectsGridBelowTop) {
  const HalfLineWindow hl(0, std::vector<double>(50, 0.0));
  std::vector<double> grid{1.0, 3.0};
  EXPECT_THROW(negativity_monotonicity_scan(hl, grid), Error);
}

TEST(Limit, FreeLimitAtBandEdgeIsMinusOne) {
  const HalfLineWindow hl(0, std::vector<double>(4001, 0.0));
  const auto eps = default_eps_sequence(hl, 2.0);
  ASSERT_GE(eps.size(), 3u);
  const auto r = subordinate_limit(hl, 2.0, eps);
  EXPECT_TRUE(r.monotone);
  EXPECT_FALSE(r.diverges);
  EXPECT_NEAR(r.limit, -1.0, 5e-2);
}

TEST(Positivity, DetectsSignChange) {
  std::vector<double> u{1.0, 2.0, 0.5, -0.1, 0.3};
  const auto r = positivity_check(u, 0);
  EXPECT_FALSE(r.positive);
  EXPECT_GE(r.sign_changes, 1u);
  std::vector<double> w{0.1, 0.5, 1.0, 0.4};
  EXPECT_TRUE(positivity_check(w, -1).positive);
}
