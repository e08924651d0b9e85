#pragma once

// Finite-window discrete Schrodinger operators
//
//   (H u)(n) = u(n+1) + u(n-1) + V(n) u(n),
//
// their Dirichlet truncations, and the almost sure spectrum of i.i.d. models.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "schro/errors.hpp"
#include "schro/spectrum_set.hpp"

namespace schro {

/// Topological support of an atomic single-site distribution.
class SiteSupport {
 public:
  SiteSupport() = default;
  explicit SiteSupport(std::vector<double> points) : points_(std::move(points)) {
    require(!points_.empty(), "site support must be nonempty");
    for (double p : points_) require(std::isfinite(p), "site support values must be finite");
    std::sort(points_.begin(), points_.end());
    for (std::size_t i = 1; i < points_.size(); ++i)
      require(points_[i - 1] < points_[i], "site support has a repeated value");
  }

  static SiteSupport bernoulli(double lambda) { return SiteSupport({0.0, lambda}); }

  const std::vector<double>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  double min() const { return points_.front(); }
  double max() const { return points_.back(); }

  bool is_subset_of(const SiteSupport& other) const {
    return std::includes(other.points_.begin(), other.points_.end(), points_.begin(), points_.end());
  }

 private:
  std::vector<double> points_;
};

/// Support plus sampling weights. Weights only affect sampling, never spectra.
struct SiteLaw {
  SiteSupport support;
  std::vector<double> weights;  // empty = uniform

  double sample(double u01) const {
    const auto& pts = support.points();
    if (weights.empty()) {
      auto k = static_cast<std::size_t>(u01 * static_cast<double>(pts.size()));
      return pts[std::min(k, pts.size() - 1)];
    }
    double total = 0.0;
    for (double w : weights) total += w;
    double acc = 0.0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      acc += weights[k] / total;
      if (u01 < acc) return pts[k];
    }
    return pts.back();
  }
};

/// Potential values V(n) = background(n) + word(n) on the sites n_min..n_max.
class RealizationWindow {
 public:
  RealizationWindow() = default;
  RealizationWindow(std::int64_t n_min, std::vector<double> background, std::vector<double> word)
      : n_min_(n_min), background_(std::move(background)), word_(std::move(word)) {
    require(!background_.empty(), "realization window must contain at least one site");
    require(background_.size() == word_.size(), "background and word lengths differ");
  }

  static RealizationWindow from_potential(std::int64_t n_min, std::vector<double> v) {
    std::vector<double> zero(v.size(), 0.0);
    return RealizationWindow(n_min, std::move(v), std::move(zero));
  }
  static RealizationWindow constant(std::int64_t n_min, std::int64_t n_max, double value) {
    require(n_min <= n_max, "n_min > n_max");
    return from_potential(n_min, std::vector<double>(static_cast<std::size_t>(n_max - n_min + 1), value));
  }
  /// Linear ramp V_bg(n) = slope * n plus an optional word.
  static RealizationWindow ramp(std::int64_t n_min, std::int64_t n_max, double slope = 1.0,
                                std::vector<double> word = {}) {
    require(n_min <= n_max, "n_min > n_max");
    const auto len = static_cast<std::size_t>(n_max - n_min + 1);
    std::vector<double> bg(len);
    for (std::size_t i = 0; i < len; ++i) bg[i] = slope * static_cast<double>(n_min + static_cast<std::int64_t>(i));
    if (word.empty()) word.assign(len, 0.0);
    return RealizationWindow(n_min, std::move(bg), std::move(word));
  }

  std::int64_t n_min() const { return n_min_; }
  std::int64_t n_max() const { return n_min_ + static_cast<std::int64_t>(background_.size()) - 1; }
  std::size_t size() const { return background_.size(); }
  bool contains(std::int64_t n) const { return n >= n_min() && n <= n_max(); }

  double V(std::int64_t n) const {
    if (!contains(n)) throw Error(ErrorKind::InvalidInput, "site " + std::to_string(n) + " outside window");
    const auto i = static_cast<std::size_t>(n - n_min_);
    return background_[i] + word_[i];
  }
  std::vector<double> potential() const {
    std::vector<double> v(size());
    for (std::size_t i = 0; i < size(); ++i) v[i] = background_[i] + word_[i];
    return v;
  }
  const std::vector<double>& background() const { return background_; }
  const std::vector<double>& word() const { return word_; }

  /// Sub-window [lo, hi] (inclusive).
  RealizationWindow slice(std::int64_t lo, std::int64_t hi) const {
    require(contains(lo) && contains(hi) && lo <= hi, "slice outside window");
    const auto a = static_cast<std::ptrdiff_t>(lo - n_min_);
    const auto b = static_cast<std::ptrdiff_t>(hi - n_min_) + 1;
    return RealizationWindow(lo, {background_.begin() + a, background_.begin() + b},
                             {word_.begin() + a, word_.begin() + b});
  }

 private:
  std::int64_t n_min_ = 0;
  std::vector<double> background_;
  std::vector<double> word_;
};

/// Symmetric tridiagonal matrix; the Schrodinger truncation has unit off-diagonals.
struct Tridiagonal {
  std::vector<double> diag;
  std::vector<double> offdiag;  // size diag.size() - 1

  std::size_t size() const { return diag.size(); }
};

/// Dirichlet (hard-wall) truncation of H to the window.
inline Tridiagonal assemble_truncation(const RealizationWindow& window) {
  require(window.size() >= 1, "window length must be >= 1");
  Tridiagonal t;
  t.diag = window.potential();
  t.offdiag.assign(t.diag.size() - 1, 1.0);
  return t;
}

inline Tridiagonal assemble_truncation(std::span<const double> potential) {
  require(!potential.empty(), "window length must be >= 1");
  Tridiagonal t;
  t.diag.assign(potential.begin(), potential.end());
  t.offdiag.assign(t.diag.size() - 1, 1.0);
  return t;
}

inline void validate(const Tridiagonal& t) {
  require(!t.diag.empty(), "empty tridiagonal");
  require(t.offdiag.size() + 1 == t.diag.size(), "tridiagonal off-diagonal length mismatch");
  for (double d : t.diag) require(std::isfinite(d), "non-finite diagonal entry");
  for (double e : t.offdiag) require(std::isfinite(e), "non-finite off-diagonal entry");
}

struct TruncationResult {
  std::vector<double> eigenvalues;         // ascending
  std::optional<std::vector<double>> top_vector;  // unit norm, largest entry positive
  double top_residual = 0.0;               // ||H v - E_top v||
};

inline std::vector<double> tridiag_multiply(const Tridiagonal& t, std::span<const double> v) {
  const std::size_t n = t.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = t.diag[i] * v[i];
    if (i > 0) s += t.offdiag[i - 1] * v[i - 1];
    if (i + 1 < n) s += t.offdiag[i] * v[i + 1];
    out[i] = s;
  }
  return out;
}

/// All eigenvalues of the truncation (dense symmetric QR on the tridiagonal form).
inline TruncationResult truncated_spectrum(const Tridiagonal& t, bool want_top_vector = false) {
  validate(t);
  const auto n = static_cast<Eigen::Index>(t.size());
  Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(t.diag.data(), n);
  Eigen::VectorXd e(std::max<Eigen::Index>(n - 1, 0));
  for (Eigen::Index i = 0; i + 1 < n; ++i) e[i] = t.offdiag[static_cast<std::size_t>(i)];

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(d, e, want_top_vector ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw Error(ErrorKind::NumericFailure,
                "tridiagonal eigensolver did not converge (size " + std::to_string(t.size()) + ")");

  TruncationResult r;
  r.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + n);
  if (want_top_vector) {
    Eigen::VectorXd v = es.eigenvectors().col(n - 1);
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v[imax] < 0) v = -v;
    v.normalize();
    std::vector<double> vec(v.data(), v.data() + n);
    auto hv = tridiag_multiply(t, vec);
    double res = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double di = hv[static_cast<std::size_t>(i)] - r.eigenvalues.back() * vec[static_cast<std::size_t>(i)];
      res += di * di;
    }
    r.top_residual = std::sqrt(res);
    r.top_vector = std::move(vec);
  }
  return r;
}

/// Number of eigenvalues strictly below x (Sturm sequence / LDL^T inertia).
inline std::size_t sturm_count_below(const Tridiagonal& t, double x) {
  constexpr double kTiny = 1e-300;
  std::size_t count = 0;
  double q = t.diag[0] - x;
  for (std::size_t i = 0;; ++i) {
    if (q == 0.0) q = -kTiny;
    if (q < 0.0) ++count;
    if (i + 1 == t.size()) break;
    q = t.diag[i + 1] - x - t.offdiag[i] * t.offdiag[i] / q;
  }
  return count;
}

/// Gershgorin enclosure of the truncation spectrum.
inline Interval gershgorin(const Tridiagonal& t) {
  Interval g{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < t.size(); ++i) {
    double r = 0.0;
    if (i > 0) r += std::abs(t.offdiag[i - 1]);
    if (i + 1 < t.size()) r += std::abs(t.offdiag[i]);
    g.lo = std::min(g.lo, t.diag[i] - r);
    g.hi = std::max(g.hi, t.diag[i] + r);
  }
  return g;
}

/// Largest eigenvalue by Sturm bisection; O(n) per step.
inline double top_eigenvalue(const Tridiagonal& t, double tol = 1e-14) {
  validate(t);
  const Interval g = gershgorin(t);
  double lo = g.lo - 1.0, hi = g.hi + 1.0;
  const std::size_t n = t.size();
  for (int it = 0; it < 200 && hi - lo > tol * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (sturm_count_below(t, mid) == n) hi = mid;  // every eigenvalue below mid
    else lo = mid;
  }
  return 0.5 * (lo + hi);
}

/// Almost sure spectrum of the i.i.d. model: [-2,2] + supp nu.
inline SpectrumSet anderson_almost_sure_spectrum(const SiteSupport& support) {
  require(support.size() > 0, "empty site support");
  std::vector<Interval> iv;
  iv.reserve(support.size());
  for (double s : support.points()) iv.push_back({-2.0 + s, 2.0 + s});
  return SpectrumSet(std::move(iv));
}

/// Closed-interval eigenvalue count of the Dirichlet truncation. Eigenvalues within
/// `slack` of an endpoint count as inside; the default is a multiple of the
/// solver's backward error so that exact-integer eigenvalues are not lost to rounding.
inline std::size_t eigenvalue_count_in_interval(const RealizationWindow& window, Interval interval,
                                                std::optional<double> slack = std::nullopt) {
  require(interval.lo <= interval.hi, "interval with lo > hi");
  const Tridiagonal t = assemble_truncation(window);
  const Interval g = gershgorin(t);
  const double scale = std::max({1.0, std::abs(g.lo), std::abs(g.hi)});
  const double s = slack.value_or(1e-10 * scale);
  const auto r = truncated_spectrum(t);
  return static_cast<std::size_t>(std::count_if(r.eigenvalues.begin(), r.eigenvalues.end(),
                                                [&](double e) { return interval.contains(e, s); }));
}

}  // namespace schro
