#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "schro/operator_core.hpp"
#include "schro/parallel.hpp"

using namespace schro;

TEST(AsSpectrum, TwoPointSupportSplits) {
  const auto s = anderson_almost_sure_spectrum(SiteSupport({0.0, 5.0}));
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s.intervals()[0], (Interval{-2.0, 2.0}));
  EXPECT_EQ(s.intervals()[1], (Interval{3.0, 7.0}));
}

TEST(AsSpectrum, OverlappingSupportMerges) {
  const auto s = anderson_almost_sure_spectrum(SiteSupport({0.0, 1.0}));
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s.intervals()[0], (Interval{-2.0, 3.0}));
}

TEST(AsSpectrum, TouchingIntervalsMerge) {
  const auto s = anderson_almost_sure_spectrum(SiteSupport({0.0, 4.0}));
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s.intervals()[0], (Interval{-2.0, 6.0}));
}

TEST(AsSpectrum, EmptySupportRejected) {
  EXPECT_THROW(anderson_almost_sure_spectrum(SiteSupport(std::vector<double>{})), Error);
}

TEST(SpectrumSet, NormalizesAndMeasuresDistance) {
  const SpectrumSet a({{3.0, 4.0}, {0.0, 1.0}, {0.5, 2.0}});
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a.intervals()[0], (Interval{0.0, 2.0}));
  const SpectrumSet b({{0.0, 2.0}, {3.0, 4.5}});
  EXPECT_NEAR(hausdorff_distance(a, b), 0.5, 1e-12);
  EXPECT_TRUE(a.subset_of(b));
  EXPECT_FALSE(b.subset_of(a));
  EXPECT_TRUE(b.subset_of(a, 0.5));
}

TEST(Truncation, FreeLaplacianEigenvaluesMatchClosedForm) {
  const std::int64_t n = 40;
  const auto w = RealizationWindow::constant(1, n, 0.0);
  const auto spec = truncated_spectrum(assemble_truncation(w));
  ASSERT_EQ(spec.eigenvalues.size(), static_cast<std::size_t>(n));
  for (std::int64_t k = 1; k <= n; ++k) {
    const double exact = 2.0 * std::cos(std::numbers::pi * static_cast<double>(k) / static_cast<double>(n + 1));
    EXPECT_NEAR(spec.eigenvalues[static_cast<std::size_t>(n - k)], exact, 1e-12);
  }
}

TEST(Truncation, TopEigenvalueBisectionMatchesDenseSolver) {
  std::mt19937_64 g(11);
  std::vector<double> v(300);
  for (double& x : v) x = uniform01(g) < 0.5 ? 0.0 : 0.7;
  const auto t = assemble_truncation(v);
  EXPECT_NEAR(top_eigenvalue(t), truncated_spectrum(t).eigenvalues.back(), 1e-11);
}

TEST(Truncation, SturmCountAgreesWithEigenvalues) {
  std::mt19937_64 g(5);
  std::vector<double> v(120);
  for (double& x : v) x = 3.0 * uniform01(g);
  const auto t = assemble_truncation(v);
  const auto ev = truncated_spectrum(t).eigenvalues;
  for (double x : {-1.0, 0.3, 1.7, 2.9, 4.5}) {
    const auto expect = static_cast<std::size_t>(std::count_if(ev.begin(), ev.end(), [&](double e) { return e < x; }));
    EXPECT_EQ(sturm_count_below(t, x), expect) << x;
  }
}

TEST(Truncation, RampCountsAreStable) {
  const Interval iv{-1.0, 1.0};
  EXPECT_EQ(eigenvalue_count_in_interval(RealizationWindow::ramp(-50, 50), iv),
            eigenvalue_count_in_interval(RealizationWindow::ramp(-200, 200), iv));
}

TEST(Window, PotentialIsBackgroundPlusWord) {
  const RealizationWindow w(-1, {1.0, 2.0, 3.0}, {0.0, 0.5, 0.0});
  EXPECT_EQ(w.V(0), 2.5);
  EXPECT_THROW(w.V(2), Error);
  EXPECT_EQ(w.slice(0, 1).potential(), (std::vector<double>{2.5, 3.0}));
}

TEST(Window, NonFiniteDiagonalRejected) {
  std::vector<double> v{0.0, NAN, 1.0};
  EXPECT_THROW(truncated_spectrum(assemble_truncation(v)), Error);
}

TEST(SiteLaw, UniformSamplingHitsEveryPoint) {
  const SiteLaw law{SiteSupport({0.0, 0.5, 1.0}), {}};
  EXPECT_EQ(law.sample(0.0), 0.0);
  EXPECT_EQ(law.sample(0.5), 0.5);
  EXPECT_EQ(law.sample(0.999), 1.0);
}
