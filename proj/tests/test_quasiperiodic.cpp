#include <gtest/gtest.h>

#include <cmath>

#include "schro/quasiperiodic.hpp"

using namespace schro;

namespace {

constexpr double kPilotTop = 2.000357275721;

QPParams pilot(double a = 1e-3) {
  QPParams p;
  p.lambda = 0.1;
  p.a = a;
  return p;
}

}  // namespace

TEST(Background, GoldenMeanCosineDefaults) {
  const QPBackground bg;
  EXPECT_DOUBLE_EQ(bg.alpha, (std::sqrt(5.0) - 1.0) / 2.0);
  EXPECT_DOUBLE_EQ(bg.f(0.0), 1.0);
  EXPECT_NEAR(bg.f(0.5), -1.0, 1e-15);
  EXPECT_DOUBLE_EQ(qp_value(bg, 0), 0.05);
}

TEST(Background, NegativeCouplingRejected) {
  QPBackground bg;
  bg.c = -1.0;
  EXPECT_THROW(bg.validate(), Error);
}

TEST(TopEnergy, PilotEstimateNearReference) {
  const auto t = top_energy(QPBackground{}, 500, 16);
  EXPECT_NEAR(t.e_star, kPilotTop, 1e-4);
  EXPECT_LE(t.e_half, t.e_star + 1e-12);
}

TEST(TopEnergy, ZeroCouplingIsFreeTop) {
  QPBackground bg;
  bg.c = 0.0;
  const auto t = top_energy(bg, 400, 4);
  EXPECT_NEAR(t.e_star, 2.0, 1e-4);
  EXPECT_LT(t.e_star, 2.0);
}

TEST(Sections, InvariantWithSmallResidual) {
  const double E = kPilotTop + 0.1 - 1e-3;
  const auto s = invariant_sections(QPBackground{}, E);
  EXPECT_LE(s.residual_att, 1e-8);
  EXPECT_LE(s.residual_rep, 1e-8);
  EXPECT_GT(s.min_gap, 0.0);
  EXPECT_GE(s.gap, 0.1 * std::sqrt(0.1));
  EXPECT_LE(s.gap, 10.0 * std::sqrt(0.1));
  EXPECT_LE(invariance_residual(QPBackground{}, E, s.att), 1e-8);
}

TEST(Sections, ZeroCouplingIsClosedForm) {
  QPBackground bg;
  bg.c = 0.0;
  const auto s = invariant_sections(bg, 2.05);
  const auto fp = fixed_points(2.05 - 2.0);
  EXPECT_TRUE(s.att.is_constant());
  EXPECT_EQ(s.att[0], fp.x_att);
  EXPECT_EQ(s.rep[0], fp.x_rep);
}

TEST(Sections, EnergyInsideSpectrumRejected) {
  QPBackground bg;
  bg.c = 0.0;
  EXPECT_THROW(invariant_sections(bg, 1.9), Error);
}

TEST(QPConstruct, PilotCertificateVerifies) {
  const auto r = qp_construct(QPBackground{}, kPilotTop, pilot());
  EXPECT_TRUE(r.cylinders.holds());
  const auto rep = verify_certificate(r.certificate);
  for (const auto& c : rep.checks) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
  EXPECT_DOUBLE_EQ(r.certificate.e_top, kPilotTop);
}

TEST(QPConstruct, BackgroundIsQuasiPeriodic) {
  const QPBackground bg;
  const auto r = qp_construct(bg, kPilotTop, pilot());
  const auto& c = r.certificate;
  for (std::int64_t n = -5; n <= 5; ++n)
    EXPECT_EQ(c.background[static_cast<std::size_t>(n + c.n_back)], qp_value(bg, n));
}

TEST(QPSweep, SmallGridAllVerified) {
  const std::vector<double> grid{3e-4, 1e-3, 5e-3};
  const auto rep = qp_sweep_interval(QPBackground{}, kPilotTop, grid, pilot(), {}, 2);
  EXPECT_EQ(rep.verified(), grid.size());
  for (const auto& row : rep.rows) {
    ASSERT_TRUE(row.section_residual.has_value());
    EXPECT_LE(*row.section_residual, 1e-8);
  }
}
