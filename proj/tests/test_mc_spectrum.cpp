#include <gtest/gtest.h>

#include "schro/mc_spectrum.hpp"

using namespace schro;

namespace {

McParams quick() {
  McParams p;
  p.half_length = 300;
  p.samples = 40;
  p.seed = 1;
  return p;
}

}  // namespace

TEST(McSpectrum, TwoPointSupportMatchesFormula) {
  const SiteLaw law{SiteSupport({0.0, 5.0}), {}};
  const auto est = mc_essential_spectrum(law, quick());
  const auto formula = anderson_almost_sure_spectrum(law.support);
  // one step of dilation plus up to two steps of witness shortfall at the band edges
  EXPECT_LE(hausdorff_distance(est.sigma, formula), 3 * quick().grid_step + 1e-9);
  EXPECT_EQ(est.sigma.size(), 2u);
}

TEST(McSpectrum, ThreadCountInvariant) {
  const SiteLaw law{SiteSupport({0.0, 1.0}), {}};
  auto p = quick();
  const auto a = mc_essential_spectrum(law, p);
  p.threads = 4;
  const auto b = mc_essential_spectrum(law, p);
  ASSERT_EQ(a.grid.size(), b.grid.size());
  for (std::size_t i = 0; i < a.grid.size(); ++i) EXPECT_EQ(a.grid[i].hits, b.grid[i].hits);
}

TEST(McSpectrum, SampleWindowsDependOnlyOnSeedAndIndex) {
  const SiteLaw law{SiteSupport({0.0, 1.0}), {}};
  EXPECT_EQ(sample_window(law, 50, 7, 3).potential(), sample_window(law, 50, 7, 3).potential());
  EXPECT_NE(sample_window(law, 50, 7, 3).potential(), sample_window(law, 50, 7, 4).potential());
}

TEST(SupportCheck, NestedSupportsGiveNestedEstimates) {
  const SiteLaw small{SiteSupport({0.0, 1.0}), {}}, big{SiteSupport({0.0, 0.5, 1.0}), {}};
  const auto rep = support_monotonicity_check(small, big, quick());
  EXPECT_TRUE(rep.holds());
}

TEST(SupportCheck, NonNestedSupportsRejected) {
  const SiteLaw a{SiteSupport({0.0, 2.0}), {}}, b{SiteSupport({0.0, 1.0}), {}};
  EXPECT_THROW(support_monotonicity_check(a, b, quick()), Error);
}

TEST(SupportCheck, DisjointSpectraReportViolation) {
  // {0,5} has a gap that {0} alone does not fill; check in the reverse direction
  const SiteLaw small{SiteSupport({5.0}), {}}, big{SiteSupport({0.0, 5.0}), {}};
  auto p = quick();
  const auto rep = support_monotonicity_check(small, big, p);
  EXPECT_TRUE(rep.holds());
  const SiteLaw zero{SiteSupport({0.0}), {}};
  const auto e0 = mc_essential_spectrum(zero, p);
  EXPECT_FALSE(e0.sigma.subset_of(rep.sigma1.sigma, p.grid_step));
}
