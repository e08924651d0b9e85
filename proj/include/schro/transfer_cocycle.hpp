#pragma once

// SL(2,R) transfer matrices of the recurrence u(n+1) + u(n-1) + V(n) u(n) = E u(n).
//
// Pi_n = ((E - V(n), -1), (1, 0)) maps (u(n), u(n-1)) to (u(n+1), u(n)).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "schro/errors.hpp"
#include "schro/operator_core.hpp"
#include "schro/parallel.hpp"

namespace schro {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  double norm() const { return std::hypot(x, y); }
  double norm1() const { return std::abs(x) + std::abs(y); }
};

struct Mat2 {
  double a11 = 1.0, a12 = 0.0, a21 = 0.0, a22 = 1.0;

  static Mat2 identity() { return {}; }
  double det() const { return a11 * a22 - a12 * a21; }
  /// Inverse of a unimodular matrix (adjugate; no division by det).
  Mat2 unimodular_inverse() const { return {a22, -a12, -a21, a11}; }
  Vec2 operator*(Vec2 v) const { return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y}; }
  Mat2 operator*(const Mat2& b) const {
    return {a11 * b.a11 + a12 * b.a21, a11 * b.a12 + a12 * b.a22,
            a21 * b.a11 + a22 * b.a21, a21 * b.a12 + a22 * b.a22};
  }
  /// Operator 2-norm.
  double norm() const {
    // scaled by the largest entry so that s * s cannot overflow
    const double m = std::max({std::abs(a11), std::abs(a12), std::abs(a21), std::abs(a22)});
    if (m == 0.0 || !std::isfinite(m)) return m;
    const double b11 = a11 / m, b12 = a12 / m, b21 = a21 / m, b22 = a22 / m;
    const double s = b11 * b11 + b12 * b12 + b21 * b21 + b22 * b22;
    const double d = b11 * b22 - b12 * b21;
    const double disc = std::max(0.0, s * s - 4.0 * d * d);
    return m * std::sqrt(0.5 * (s + std::sqrt(disc)));
  }
  double max_abs_diff(const Mat2& b) const {
    return std::max({std::abs(a11 - b.a11), std::abs(a12 - b.a12), std::abs(a21 - b.a21), std::abs(a22 - b.a22)});
  }
  friend bool operator==(const Mat2&, const Mat2&) = default;
};

inline Mat2 step_matrix(double E, double v) { return {E - v, -1.0, 1.0, 0.0}; }
inline Mat2 step_inverse(double E, double v) { return {0.0, 1.0, -1.0, E - v}; }

/// T_{[m, m+i], E}: i > 0 gives Pi_{m+i-1} ... Pi_m, i = 0 the identity,
/// i < 0 gives Pi_{m+i}^{-1} ... Pi_{m-1}^{-1}.
inline Mat2 product_over(double E, const RealizationWindow& w, std::int64_t m, std::int64_t i) {
  if (i > 0) {
    if (!w.contains(m) || !w.contains(m + i - 1))
      throw Error(ErrorKind::InvalidInput, "product_over: sites outside window");
    Mat2 t;
    for (std::int64_t n = m; n < m + i; ++n) t = step_matrix(E, w.V(n)) * t;
    return t;
  }
  if (i < 0) {
    if (!w.contains(m + i) || !w.contains(m - 1))
      throw Error(ErrorKind::InvalidInput, "product_over: sites outside window");
    Mat2 t;
    for (std::int64_t n = m - 1; n >= m + i; --n) t = step_inverse(E, w.V(n)) * t;
    return t;
  }
  return Mat2::identity();
}

/// Solution values u(n) on [n_min - 1, n_max + 1], stored as mantissas times
/// 2^exponent. The exponent is shared; it is nonzero only after rescaling.
struct SolutionWindow {
  double energy = 0.0;
  std::int64_t n_first = 0;  // index of values[0] (= n_min - 1)
  std::vector<double> values;
  int exponent = 0;

  std::int64_t n_last() const { return n_first + static_cast<std::int64_t>(values.size()) - 1; }
  double at(std::int64_t n) const { return values.at(static_cast<std::size_t>(n - n_first)); }
};

/// Propagates the initial pair through the window. When |u| exceeds 1e150 all
/// stored values are rescaled by a common power of two.
inline SolutionWindow propagate(double E, const RealizationWindow& w, double u_before, double u_first) {
  require(u_before != 0.0 || u_first != 0.0, "propagate: initial pair is zero");
  require(std::isfinite(E) && std::isfinite(u_before) && std::isfinite(u_first), "propagate: non-finite input");
  SolutionWindow s;
  s.energy = E;
  s.n_first = w.n_min() - 1;
  s.values.reserve(w.size() + 2);
  s.values.push_back(u_before);
  s.values.push_back(u_first);
  for (std::int64_t n = w.n_min(); n <= w.n_max(); ++n) {
    const std::size_t k = s.values.size();
    const double next = (E - w.V(n)) * s.values[k - 1] - s.values[k - 2];
    if (!std::isfinite(next))
      throw Error(ErrorKind::NumericFailure, "propagate: overflow at site " + std::to_string(n + 1));
    s.values.push_back(next);
    if (std::abs(next) > 1e150) {
      constexpr int kShift = 500;
      for (double& x : s.values) x = std::ldexp(x, -kShift);
      s.exponent += kShift;
    }
  }
  return s;
}

/// Per-site relative residual of the recurrence,
/// |u(n+1) + u(n-1) + (V(n) - E) u(n)| / (|u(n+1)| + |u(n-1)| + |V(n) - E| |u(n)|),
/// for every window site n. `u` holds u(n_min - 1) .. u(n_max + 1).
inline std::vector<double> recurrence_residuals(double E, const RealizationWindow& w, std::span<const double> u) {
  require(u.size() == w.size() + 2, "recurrence_residuals: solution length must be window size + 2");
  std::vector<double> r(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double v = w.V(w.n_min() + static_cast<std::int64_t>(i));
    const double a = u[i], b = u[i + 1], c = u[i + 2];
    const double num = std::abs(c + a + (v - E) * b);
    const double den = std::abs(c) + std::abs(a) + std::abs(v - E) * std::abs(b);
    r[i] = den > 0.0 ? num / den : 0.0;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Essential-spectrum witnesses

struct WitnessParams {
  double K = 10.0;
  int N = 20;
  int angle_grid = 256;
  int min_count = 3;
  std::int64_t stride = 1;
  bool stop_at_min_count = true;
};

struct Witness {
  double K = 0.0;
  int N = 0;
  std::vector<std::int64_t> positions;
  std::vector<Vec2> unit_vectors;
  std::vector<double> min_norms;  // min over the angle grid of max_{|i|<=N} |T u|
};

struct WitnessScan {
  std::optional<Witness> witness;
  Witness candidates;  // everything accepted, even if fewer than min_count
  std::size_t positions_scanned = 0;
};

namespace detail {

struct AngleTable {
  std::vector<double> c, s;
  explicit AngleTable(int n) : c(static_cast<std::size_t>(n)), s(static_cast<std::size_t>(n)) {
    for (int k = 0; k < n; ++k) {
      const double phi = std::numbers::pi * k / n;
      c[static_cast<std::size_t>(k)] = std::cos(phi);
      s[static_cast<std::size_t>(k)] = std::sin(phi);
    }
  }
};

// |T u|^2 = p u_x^2 + 2 q u_x u_y + r u_y^2
struct QuadForm {
  double p, q, r;
  static QuadForm of(const Mat2& t) {
    return {t.a11 * t.a11 + t.a21 * t.a21, t.a11 * t.a12 + t.a21 * t.a22, t.a12 * t.a12 + t.a22 * t.a22};
  }
  double eval(double c, double s) const { return p * c * c + 2.0 * q * c * s + r * s * s; }
};

struct WitnessScratch {
  std::vector<QuadForm> forms;
};

// Angles are doubled, psi = 2 phi in [0, 2 pi), so that u and -u coincide.
// |T u|^2 = A + R cos(psi - psi0); the sublevel set {|T u| <= K} is the arc
// |psi - psi0 - pi| <= acos((A - K^2)/R).
struct Arc {
  double center = 0.0, half = std::numbers::pi;  // half >= pi/2 means unconstrained
};

inline double wrap_pi(double x) {
  x = std::remainder(x, 2.0 * std::numbers::pi);
  return x;
}

/// Sublevel arc of one form; returns false if the sublevel set is empty.
inline bool sublevel_arc(const QuadForm& f, double K2, Arc& out) {
  const double A = 0.5 * (f.p + f.r);
  const double X = 0.5 * (f.p - f.r);
  const double R = std::hypot(X, f.q);
  if (R <= 0.0) {
    out = {};
    return A <= K2;
  }
  const double t = (A - K2) / R;  // need cos(delta) >= t around the minimum
  if (t > 1.0) return false;
  if (t <= -1.0) {
    out = {};
    return true;
  }
  out.center = std::atan2(f.q, X) + std::numbers::pi;
  out.half = std::acos(t) + 1e-9;  // widened: the prefilter must never reject a passing angle
  return true;
}

/// Intersects two arcs of half-width < pi/2; returns false if disjoint.
inline bool intersect(Arc& acc, const Arc& b) {
  constexpr double kHalfPi = std::numbers::pi / 2;
  if (b.half >= kHalfPi) return true;
  if (acc.half >= kHalfPi) {
    acc = b;
    return true;
  }
  const double d = wrap_pi(b.center - acc.center);
  const double lo = std::max(-acc.half, d - b.half);
  const double hi = std::min(acc.half, d + b.half);
  if (lo > hi) return false;
  acc.center += 0.5 * (lo + hi);
  acc.half = 0.5 * (hi - lo);
  return true;
}

}  // namespace detail

/// Minimizes max_{|i|<=N} |T_{[m,m+i]} u| over the unit-vector angle grid for the
/// position with index m in V. Returns (min value, best angle index); the index is
/// -1 when no grid vector keeps every norm <= cutoff.
///
/// The sublevel arcs of the partial products are intersected as they are formed,
/// which rejects hyperbolic stretches after a few steps; the grid scan runs only
/// when the intersection survives.
inline std::pair<double, int> witness_min_norm(double E, std::span<const double> V, std::size_t m, int N,
                                               const detail::AngleTable& angles, double cutoff,
                                               detail::WitnessScratch& scratch) {
  auto& forms = scratch.forms;
  forms.resize(2 * static_cast<std::size_t>(N));
  const double cut2 = cutoff * cutoff;
  Mat2 f, b;
  detail::Arc feasible, arc;
  // Outermost products go first in `forms` so that failing grid vectors exit early.
  for (int i = 0; i < N; ++i) {
    f = step_matrix(E, V[m + static_cast<std::size_t>(i)]) * f;
    b = step_inverse(E, V[m - 1 - static_cast<std::size_t>(i)]) * b;
    const auto slot = 2 * static_cast<std::size_t>(N - 1 - i);
    forms[slot] = detail::QuadForm::of(f);
    forms[slot + 1] = detail::QuadForm::of(b);
    for (std::size_t k = slot; k < slot + 2; ++k) {
      if (!detail::sublevel_arc(forms[k], cut2, arc) || !detail::intersect(feasible, arc))
        return {std::numeric_limits<double>::infinity(), -1};
    }
  }
  double best = std::numeric_limits<double>::infinity();
  int best_k = -1;
  const auto n_angles = static_cast<int>(angles.c.size());
  for (int k = 0; k < n_angles; ++k) {
    const double c = angles.c[static_cast<std::size_t>(k)], s = angles.s[static_cast<std::size_t>(k)];
    double worst = 1.0;  // i = 0 is the identity
    bool failed = false;
    for (const auto& qf : forms) {
      worst = std::max(worst, qf.eval(c, s));
      if (worst > cut2 || worst >= best) {
        failed = true;
        break;
      }
    }
    if (!failed) {
      best = worst;
      best_k = k;
    }
  }
  if (best_k < 0) return {std::numeric_limits<double>::infinity(), -1};
  return {std::sqrt(best), best_k};
}

/// Greedy scan for an essential-spectrum witness at energy E. Positions are
/// accepted left to right when the grid minimum is <= K, keeping accepted
/// positions more than 2N apart.
inline WitnessScan witness_search(double E, const RealizationWindow& w, const WitnessParams& p) {
  require(p.N >= 1, "witness N must be >= 1");
  require(p.angle_grid >= 8, "angle_grid must be >= 8");
  require(p.K > 0.0, "witness K must be positive");
  require(w.size() >= static_cast<std::size_t>(2 * p.N + 1), "window shorter than 2N+1");
  require(p.stride >= 1, "stride must be >= 1");
  const auto V = w.potential();
  const detail::AngleTable angles(p.angle_grid);
  detail::WitnessScratch scratch;
  WitnessScan scan;
  scan.candidates.K = p.K;
  scan.candidates.N = p.N;
  const auto first = static_cast<std::size_t>(p.N);
  const std::size_t last = V.size() - static_cast<std::size_t>(p.N);  // inclusive
  for (std::size_t m = first; m <= last;) {
    ++scan.positions_scanned;
    auto [val, k] = witness_min_norm(E, V, m, p.N, angles, p.K, scratch);
    if (k >= 0) {
      scan.candidates.positions.push_back(w.n_min() + static_cast<std::int64_t>(m));
      scan.candidates.unit_vectors.push_back({angles.c[static_cast<std::size_t>(k)], angles.s[static_cast<std::size_t>(k)]});
      scan.candidates.min_norms.push_back(val);
      if (p.stop_at_min_count && static_cast<int>(scan.candidates.positions.size()) >= p.min_count) break;
      m += static_cast<std::size_t>(2 * p.N + 1);
    } else {
      m += static_cast<std::size_t>(p.stride);
    }
  }
  if (static_cast<int>(scan.candidates.positions.size()) >= p.min_count) scan.witness = scan.candidates;
  return scan;
}

// ---------------------------------------------------------------------------
// Lyapunov diagnostics

using PotentialSampler = std::function<double(std::mt19937_64&)>;

/// (1/length) log ||Pi_{length-1} ... Pi_0||, averaged over independent restarts.
inline double lyapunov_estimate(double E, const PotentialSampler& sampler, std::size_t length, std::uint64_t seed,
                                int restarts = 4) {
  require(length >= 100, "lyapunov_estimate: length must be >= 100");
  require(restarts >= 1, "lyapunov_estimate: restarts must be >= 1");
  double total = 0.0;
  for (int r = 0; r < restarts; ++r) {
    auto rng = substream(seed, static_cast<std::uint64_t>(r));
    Mat2 t;
    double log_norm = 0.0;
    for (std::size_t n = 0; n < length; ++n) {
      t = step_matrix(E, sampler(rng)) * t;
      const double nrm = t.norm();
      if (nrm > 1e50 || n + 1 == length) {
        log_norm += std::log(nrm);
        t = {t.a11 / nrm, t.a12 / nrm, t.a21 / nrm, t.a22 / nrm};
      }
    }
    total += log_norm / static_cast<double>(length);
  }
  return std::max(0.0, total / restarts);
}

// ---------------------------------------------------------------------------
// Cone field for large potentials, K = {|v1| > |v2|}

struct ConeCheckReport {
  double E = 0.0, M = 0.0;
  double n = 0.0;
  std::size_t samples = 0;
  std::size_t left_cone = 0;       // images with |w1| <= |w2|
  std::size_t under_expanded = 0;  // images with |w|_1 < (n-E-M)/2 |v|_1
  double required_factor = 0.0;    // (n-E-M)/2
  double min_expansion = std::numeric_limits<double>::infinity();
  bool passed() const { return left_cone == 0 && under_expanded == 0; }
};

inline ConeCheckReport cone_check_vector(double E, double M, double n, double vb, Vec2 v, ConeCheckReport& rep) {
  const Mat2 pi = step_matrix(E, n + vb);
  const Vec2 w = pi * v;
  ++rep.samples;
  if (!(std::abs(w.x) > std::abs(w.y))) ++rep.left_cone;
  const double ratio = w.norm1() / v.norm1();
  rep.min_expansion = std::min(rep.min_expansion, ratio);
  if (ratio < 0.5 * (n - E - M)) ++rep.under_expanded;
  return rep;
}

/// Samples vectors of the open cone K and bounded perturbations |V_b| <= M and checks
/// Pi_n K subset K together with the l1 expansion bound (n-E-M)/2.
/// Requires n - E - M >= 2, the smallest margin for which |w1| > |v1| = |w2| follows.
inline ConeCheckReport cone_check(double E, double M, double n, std::size_t samples, std::uint64_t seed = 0) {
  require(M >= 0.0, "cone_check: M must be >= 0");
  require(n - E - M >= 2.0, "cone_check: need n - E - M >= 2 for cone invariance");
  ConeCheckReport rep;
  rep.E = E;
  rep.M = M;
  rep.n = n;
  rep.required_factor = 0.5 * (n - E - M);
  auto rng = substream(seed, 0);
  for (std::size_t k = 0; k < samples; ++k) {
    const double v1 = (uniform01(rng) < 0.5 ? -1.0 : 1.0) * (0.1 + uniform01(rng));
    double t = uniform01(rng);
    while (t == 0.0) t = uniform01(rng);
    // |v2| < |v1| strictly; boundary |v1| = |v2| is excluded (open cone)
    const double v2 = (uniform01(rng) < 0.5 ? -1.0 : 1.0) * (1.0 - t) * std::abs(v1);
    double vb;
    switch (k % 4) {
      case 0: vb = M; break;
      case 1: vb = -M; break;
      default: vb = M * (2.0 * uniform01(rng) - 1.0); break;
    }
    cone_check_vector(E, M, n, vb, {v1, v2}, rep);
  }
  return rep;
}

}  // namespace schro
