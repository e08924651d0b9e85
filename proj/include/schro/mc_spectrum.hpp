#pragma once

// Monte-Carlo estimate of the almost sure spectrum of an i.i.d. model from
// essential-spectrum witnesses found in sampled finite windows.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "schro/errors.hpp"
#include "schro/operator_core.hpp"
#include "schro/parallel.hpp"
#include "schro/spectrum_set.hpp"
#include "schro/transfer_cocycle.hpp"

namespace schro {

/// Short witnesses: every (2N+1)-site pattern of a small support then occurs in the
/// samples, so estimates for nested supports are nested up to sampling of rare patterns.
inline WitnessParams mc_default_witness() {
  WitnessParams w;
  w.K = 1.5;
  w.N = 4;
  w.min_count = 1;
  return w;
}

struct McParams {
  std::int64_t half_length = 1000;  // window [-L, L]
  std::size_t samples = 100;
  double grid_step = 0.02;
  std::uint64_t seed = 0;
  double pad = 0.5;                 // grid extends pad beyond [min supp - 2, max supp + 2]
  WitnessParams witness = mc_default_witness();
  bool full_stats = false;          // evaluate every sample at every grid point
  unsigned threads = 1;
};

struct GridPointStats {
  double E = 0.0;
  std::size_t evaluated = 0;   // samples examined
  std::size_t hits = 0;        // samples with a witness
  std::int64_t first_hit = -1; // sample index of the first witness
};

struct McEstimate {
  SpectrumSet sigma;
  std::vector<GridPointStats> grid;
  McParams params;
};

/// Sample `index` of the i.i.d. window over [-L, L]; depends only on (seed, index).
inline RealizationWindow sample_window(const SiteLaw& law, std::int64_t half_length, std::uint64_t seed,
                                       std::uint64_t index) {
  auto g = substream(seed, index);
  std::vector<double> v(static_cast<std::size_t>(2 * half_length + 1));
  for (double& x : v) x = law.sample(uniform01(g));
  return RealizationWindow::from_potential(-half_length, std::move(v));
}

inline std::vector<double> energy_grid(const SiteSupport& support, double step, double pad) {
  require(step > 0.0 && std::isfinite(step), "grid_step must be > 0");
  require(pad >= 0.0, "pad must be >= 0");
  const double lo = support.min() - 2.0 - pad, hi = support.max() + 2.0 + pad;
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> g(n);
  for (std::size_t j = 0; j < n; ++j) g[j] = lo + static_cast<double>(j) * step;
  return g;
}

/// Union over grid energies with a witness in at least one sample, dilated by grid_step.
/// Grid points are independent, so the result does not depend on the thread count.
inline McEstimate mc_essential_spectrum(const SiteLaw& law, const McParams& p) {
  require(p.samples >= 1, "samples must be >= 1");
  require(p.half_length >= p.witness.N, "window too short for the witness length");
  const auto grid = energy_grid(law.support, p.grid_step, p.pad);
  McEstimate est;
  est.params = p;
  est.grid.resize(grid.size());

  // windows are shared by every grid point; generate them once
  std::vector<std::vector<double>> windows(p.samples);
  parallel_for(p.samples, p.threads, [&](std::size_t s) {
    windows[s] = sample_window(law, p.half_length, p.seed, s).potential();
  });

  parallel_for(grid.size(), p.threads, [&](std::size_t j) {
    GridPointStats& st = est.grid[j];
    st.E = grid[j];
    for (std::size_t s = 0; s < p.samples; ++s) {
      const auto w = RealizationWindow::from_potential(-p.half_length, windows[s]);
      ++st.evaluated;
      if (witness_search(st.E, w, p.witness).witness) {
        ++st.hits;
        if (st.first_hit < 0) st.first_hit = static_cast<std::int64_t>(s);
        if (!p.full_stats) break;
      }
    }
  });

  std::vector<Interval> iv;
  for (const auto& st : est.grid)
    if (st.hits > 0) iv.push_back({st.E - p.grid_step, st.E + p.grid_step});
  est.sigma = SpectrumSet(std::move(iv));
  return est;
}

struct ContainmentViolation {
  double lo = 0.0, hi = 0.0;  // part of Sigma_1 outside Sigma_2 + tolerance
};

struct MonotonicityReport {
  McEstimate sigma1, sigma2;
  double tolerance = 0.0;
  std::vector<ContainmentViolation> violations;
  bool holds() const { return violations.empty(); }
};

/// Sigma_1 subset Sigma_2 (+ tolerance) for supp nu_1 subset supp nu_2. Default tolerance
/// is one grid step.
inline MonotonicityReport support_monotonicity_check(const SiteLaw& law1, const SiteLaw& law2, const McParams& p,
                                                     std::optional<double> tolerance = std::nullopt) {
  if (!law1.support.is_subset_of(law2.support))
    throw Error(ErrorKind::InvalidInput, "support1 is not contained in support2");
  MonotonicityReport rep;
  rep.tolerance = tolerance.value_or(p.grid_step);
  rep.sigma1 = mc_essential_spectrum(law1, p);
  rep.sigma2 = mc_essential_spectrum(law2, p);
  const SpectrumSet fat = rep.sigma2.sigma.dilated(rep.tolerance);
  for (const auto& a : rep.sigma1.sigma.intervals()) {
    // subtract the covering intervals of fat from a
    double cur = a.lo;
    for (const auto& f : fat.intervals()) {
      if (f.hi < cur) continue;
      if (f.lo > a.hi) break;
      if (f.lo > cur) rep.violations.push_back({cur, std::min(f.lo, a.hi)});
      cur = std::max(cur, f.hi);
      if (cur >= a.hi) break;
    }
    if (cur < a.hi) rep.violations.push_back({cur, a.hi});
  }
  return rep;
}

}  // namespace schro
