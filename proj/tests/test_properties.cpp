// Oracle-equivalence properties over fixed-seed random inputs.
#include <gtest/gtest.h>

#include <cmath>

#include "schro.hpp"

using namespace schro;

namespace {

constexpr std::uint64_t kSeed = 20240601;
constexpr int kTrials = 200;

double uniform(std::mt19937_64& g, double lo, double hi) { return lo + (hi - lo) * uniform01(g); }

RealizationWindow random_window(std::mt19937_64& g, std::int64_t lo, std::int64_t hi) {
  std::vector<double> v(static_cast<std::size_t>(hi - lo + 1));
  for (double& x : v) x = uniform(g, -3.0, 3.0);
  return RealizationWindow::from_potential(lo, std::move(v));
}

}  // namespace

TEST(Property, CocycleComposition) {
  for (int t = 0; t < kTrials; ++t) {
    auto g = substream(kSeed, t);
    const auto w = random_window(g, -30, 30);
    const double E = uniform(g, -4.0, 4.0);
    const auto m = static_cast<std::int64_t>(uniform(g, -20.0, 0.0));
    const auto i = static_cast<std::int64_t>(uniform(g, 0.0, 10.0));
    const auto j = static_cast<std::int64_t>(uniform(g, 0.0, 10.0));
    const Mat2 lhs = product_over(E, w, m + i, j) * product_over(E, w, m, i);
    const Mat2 rhs = product_over(E, w, m, i + j);
    const double scale = std::max(1.0, rhs.norm());
    EXPECT_LE(lhs.max_abs_diff(rhs), 1e-12 * scale) << "trial " << t;
  }
}

TEST(Property, DeterminantDriftStaysSmall) {
  for (int t = 0; t < kTrials; ++t) {
    auto g = substream(kSeed + 1, t);
    const auto w = random_window(g, 0, 60);
    const double E = uniform(g, -1.5, 1.5);
    const Mat2 p = product_over(E, w, 0, 40);
    const double n = p.norm();
    EXPECT_LE(std::abs(p.det() - 1.0), 1e-15 * n * n * 40) << "trial " << t;
  }
}

TEST(Property, PropagateMatchesProduct) {
  for (int t = 0; t < kTrials; ++t) {
    auto g = substream(kSeed + 2, t);
    const auto w = random_window(g, -10, 10);
    const double E = uniform(g, -3.0, 3.0);
    const double u0 = uniform(g, -1.0, 1.0), u1 = uniform(g, -1.0, 1.0);
    const auto s = propagate(E, w, u0, u1);
    // s.values holds u(n_min - 1) .. u(n_max + 1)
    for (std::int64_t k = 1; k <= static_cast<std::int64_t>(w.size()); ++k) {
      const Vec2 v = product_over(E, w, w.n_min(), k) * Vec2{u1, u0};
      const double ref = v.x;
      const double got = s.at(w.n_min() + k);
      EXPECT_NEAR(got, ref, 1e-10 * std::max(1.0, std::abs(ref))) << "trial " << t << " k " << k;
    }
  }
}

TEST(Property, MoebiusInverseRoundTrip) {
  for (int t = 0; t < kTrials; ++t) {
    auto g = substream(kSeed + 3, t);
    const double a = uniform(g, -1.0, 1.0);
    const double x = std::exp(uniform(g, -3.0, 3.0));
    if (std::abs(2.0 + a - x) < 1e-3) continue;
    const double y = moebius_apply({a}, x);
    EXPECT_NEAR(moebius_inverse({a}, y), x, 1e-12 * std::max(1.0, x)) << "trial " << t;
    const double z = moebius_inverse({a}, x);
    EXPECT_NEAR(moebius_apply({a}, z), x, 1e-12 * std::max(1.0, x)) << "trial " << t;
  }
}

TEST(Property, ZeroCouplingReducesBitwise) {
  for (int t = 0; t < 20; ++t) {
    auto g = substream(kSeed + 4, t);
    const double a = std::exp(uniform(g, std::log(1e-4), std::log(5e-3)));
    ConstructorParams cp;
    cp.lambda = 0.1;
    cp.a = a;
    cp.n_back = cp.n_fwd = 120;
    QPBackground bg;
    bg.c = 0.0;
    bg.theta0 = uniform(g, 0.0, 1.0);
    QPParams qp;
    qp.lambda = cp.lambda;
    qp.a = a;
    qp.delta = cp.delta_value();
    qp.x0 = 1.0 + cp.delta_value();
    qp.n_back = cp.n_back;
    qp.n_fwd = cp.n_fwd;
    const auto flat = construct(cp);
    const auto quasi = qp_construct(bg, 2.0, qp).certificate;
    EXPECT_EQ(flat.energy, quasi.energy) << "trial " << t;
    EXPECT_EQ(flat.word, quasi.word) << "trial " << t;
    EXPECT_EQ(flat.ratios, quasi.ratios) << "trial " << t;
    EXPECT_EQ(flat.u, quasi.u) << "trial " << t;
  }
}

TEST(Property, MPathsAgreeOnRandomWindows) {
  for (int t = 0; t < 50; ++t) {
    auto g = substream(kSeed + 5, t);
    std::vector<double> v(200);
    for (double& x : v) x = uniform01(g) < 0.5 ? 0.0 : 1.0;
    const HalfLineWindow hl(0, v);
    const double z = top_eigenvalue(hl.truncation()) + uniform(g, 0.01, 2.0);
    const double a = m_function_solve<double>(hl, z);
    EXPECT_NEAR(a, m_function_cf<double>(hl, z), 1e-9 * std::max(1.0, std::abs(a))) << "trial " << t;
    EXPECT_NEAR(a, m_function_ratio<double>(hl, z), 1e-9 * std::max(1.0, std::abs(a))) << "trial " << t;
  }
}

TEST(Property, SpectrumSetHausdorffSymmetric) {
  for (int t = 0; t < kTrials; ++t) {
    auto g = substream(kSeed + 6, t);
    auto make = [&] {
      std::vector<Interval> iv;
      for (int k = 0; k < 3; ++k) {
        const double lo = uniform(g, -5.0, 5.0);
        iv.push_back({lo, lo + uniform(g, 0.0, 2.0)});
      }
      return SpectrumSet(iv);
    };
    const auto a = make(), b = make();
    EXPECT_EQ(hausdorff_distance(a, b), hausdorff_distance(b, a));
    EXPECT_EQ(hausdorff_distance(a, a), 0.0);
  }
}
