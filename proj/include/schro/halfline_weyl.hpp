#pragma once

// Half-line restrictions H_k^+ (sites k..k+L, Dirichlet at k-1 and beyond k+L) and
// their Weyl-Titchmarsh function m_k(z) = <delta_k, (H_k^+ - z)^{-1} delta_k>.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "schro/errors.hpp"
#include "schro/operator_core.hpp"
#include "schro/transfer_cocycle.hpp"

namespace schro {

class HalfLineWindow {
 public:
  HalfLineWindow() = default;
  HalfLineWindow(std::int64_t anchor, std::vector<double> potential) : anchor_(anchor), v_(std::move(potential)) {
    require(v_.size() >= 3, "half-line window needs L >= 2");
    for (double x : v_) require(std::isfinite(x), "non-finite potential value");
  }
  /// Restriction of a realization to [k, n_max].
  static HalfLineWindow from_window(const RealizationWindow& w, std::int64_t k) {
    require(w.contains(k), "anchor outside window");
    const auto sl = w.slice(k, w.n_max());
    return HalfLineWindow(k, sl.potential());
  }

  std::int64_t anchor() const { return anchor_; }
  std::int64_t length() const { return static_cast<std::int64_t>(v_.size()) - 1; }  // L
  std::size_t size() const { return v_.size(); }
  const std::vector<double>& potential() const { return v_; }
  Tridiagonal truncation() const { return assemble_truncation(v_); }

 private:
  std::int64_t anchor_ = 0;
  std::vector<double> v_;
};

/// Minimum distance from z to the truncation spectrum that m_function accepts.
inline constexpr double kResolventGuard = 1e-8;

namespace detail {

inline void guard_real(const HalfLineWindow& hl, double z) {
  const Tridiagonal t = hl.truncation();
  const std::size_t lo = sturm_count_below(t, z - kResolventGuard);
  const std::size_t hi = sturm_count_below(t, z + kResolventGuard);
  if (hi != lo) {
    throw Error(ErrorKind::IllConditioned, "z = " + std::to_string(z) + " is within " +
                                               std::to_string(kResolventGuard) + " of " +
                                               std::to_string(hi - lo) + " truncation eigenvalue(s)");
  }
}

template <class T>
void guard(const HalfLineWindow& hl, T z) {
  if constexpr (std::is_same_v<T, double>) {
    guard_real(hl, z);
  } else {
    if (std::abs(z.imag()) < kResolventGuard) guard_real(hl, z.real());
  }
}

}  // namespace detail

/// Linear-solve path: (H - z) g = delta_k by top-down Gaussian elimination, m = g(k).
template <class T>
T m_function_solve(const HalfLineWindow& hl, T z) {
  detail::guard(hl, z);
  const auto& v = hl.potential();
  const std::size_t n = v.size();
  // forward elimination on rows with unit off-diagonals; rhs e_0
  std::vector<T> cp(n), dp(n);
  T denom = T(v[0]) - z;
  cp[0] = T(1) / denom;
  dp[0] = T(1) / denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = (T(v[i]) - z) - cp[i - 1];
    if (denom == T(0)) throw Error(ErrorKind::IllConditioned, "zero pivot in the half-line solve");
    cp[i] = T(1) / denom;
    dp[i] = -dp[i - 1] / denom;
  }
  T g = dp[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) g = dp[i] - cp[i] * g;
  return g;
}

/// Continued-fraction path: m_j = 1 / (V(j) - z - m_{j+1}) stripped from the far end.
template <class T>
T m_function_cf(const HalfLineWindow& hl, T z) {
  detail::guard(hl, z);
  const auto& v = hl.potential();
  T m = T(0);
  for (std::size_t i = v.size(); i-- > 0;) {
    const T d = (T(v[i]) - z) - m;
    if (d == T(0)) throw Error(ErrorKind::IllConditioned, "zero denominator in the continued fraction");
    m = T(1) / d;
  }
  return m;
}

/// Solution-ratio path: u with u(k+L+1) = 0 propagated down to k-1, m = -u(k)/u(k-1).
template <class T>
T m_function_ratio(const HalfLineWindow& hl, T z) {
  detail::guard(hl, z);
  const auto& v = hl.potential();
  T u_next = T(0), u = T(1);  // u(k+L+1), u(k+L)
  for (std::size_t i = v.size(); i-- > 0;) {
    const T u_prev = (z - T(v[i])) * u - u_next;  // u(n-1) from the recurrence at site n
    u_next = u;
    u = u_prev;
    const double s = std::abs(u) + std::abs(u_next);
    if (s > 1e100 || (s < 1e-100 && s > 0.0)) {
      u /= T(s);
      u_next /= T(s);
    }
  }
  if (u == T(0)) throw Error(ErrorKind::IllConditioned, "solution vanishes at the Dirichlet site");
  return -u_next / u;
}

inline double m_function(const HalfLineWindow& hl, double z) { return m_function_solve<double>(hl, z); }
inline std::complex<double> m_function(const HalfLineWindow& hl, std::complex<double> z) {
  return m_function_solve<std::complex<double>>(hl, z);
}

/// Free half-line m-function (-z + sqrt(z^2 - 4))/2 for real z > 2.
inline double free_m_function(double z) {
  require(z > 2.0, "free_m_function: need z > 2");
  return (-z + std::sqrt(z * z - 4.0)) / 2.0;
}

struct ScanPoint {
  double z = 0.0, m = 0.0, slope = 0.0;  // slope to the previous grid point (0 for the first)
};

struct ScanReport {
  std::vector<ScanPoint> points;
  std::size_t nonnegative = 0;     // grid points with m >= 0
  std::size_t nonincreasing = 0;   // consecutive pairs with slope <= 0
  double top_eigenvalue = 0.0;
  bool passed() const { return !points.empty() && nonnegative == 0 && nonincreasing == 0; }
};

/// m < 0 and m increasing on a grid above the truncation top eigenvalue.
inline ScanReport negativity_monotonicity_scan(const HalfLineWindow& hl, std::span<const double> z_grid) {
  require(!z_grid.empty(), "empty z grid");
  ScanReport rep;
  rep.top_eigenvalue = top_eigenvalue(hl.truncation());
  for (std::size_t i = 0; i < z_grid.size(); ++i) {
    require(z_grid[i] > rep.top_eigenvalue, "grid point " + std::to_string(z_grid[i]) +
                                                " is not above the top eigenvalue " +
                                                std::to_string(rep.top_eigenvalue));
    if (i > 0) require(z_grid[i] > z_grid[i - 1], "z grid must be strictly increasing");
  }
  for (std::size_t i = 0; i < z_grid.size(); ++i) {
    ScanPoint p{z_grid[i], m_function(hl, z_grid[i]), 0.0};
    if (!(p.m < 0.0)) ++rep.nonnegative;
    if (i > 0) {
      p.slope = (p.m - rep.points.back().m) / (p.z - rep.points.back().z);
      if (!(p.slope > 0.0)) ++rep.nonincreasing;
    }
    rep.points.push_back(p);
  }
  return rep;
}

/// Smallest usable epsilon above E_max: finite-size effects dominate within 64 level
/// spacings of the truncation top eigenvalue.
inline double resolution_floor(const HalfLineWindow& hl, double e_max) {
  const auto spec = truncated_spectrum(hl.truncation());
  const auto& ev = spec.eigenvalues;
  const double spacing = ev.size() >= 2 ? ev[ev.size() - 1] - ev[ev.size() - 2] : 0.0;
  return std::max(0.0, ev.back() + 64.0 * spacing - e_max);
}

/// eps_j = 2^{-j}, j = 1, 2, ..., while above the resolution floor (at most 40 terms).
inline std::vector<double> default_eps_sequence(const HalfLineWindow& hl, double e_max) {
  const double floor = resolution_floor(hl, e_max);
  std::vector<double> eps;
  for (int j = 1; j <= 40; ++j) {
    const double e = std::ldexp(1.0, -j);
    if (!(e > floor)) break;
    eps.push_back(e);
  }
  return eps;
}

struct LimitReport {
  std::vector<double> eps, m;
  bool monotone = true;         // m(E_max + eps_j) decreasing in j
  bool diverges = false;        // sequence heads to -infinity
  double limit = 0.0;           // fit m0 + c1 sqrt(eps) + c2 eps on the last three points
  double last_value = 0.0;
};

/// Limit of m(E_max + eps) as eps decreases to 0.
inline LimitReport subordinate_limit(const HalfLineWindow& hl, double e_max, std::span<const double> eps_sequence) {
  require(eps_sequence.size() >= 3, "need at least three eps values");
  for (std::size_t i = 0; i < eps_sequence.size(); ++i) {
    require(eps_sequence[i] > 0.0, "eps values must be positive");
    if (i > 0) require(eps_sequence[i] < eps_sequence[i - 1], "eps sequence must be strictly decreasing");
  }
  const double floor = resolution_floor(hl, e_max);
  require(eps_sequence.back() > floor, "eps " + std::to_string(eps_sequence.back()) +
                                           " is below the truncation resolution " + std::to_string(floor));
  LimitReport r;
  r.eps.assign(eps_sequence.begin(), eps_sequence.end());
  for (double e : r.eps) r.m.push_back(m_function(hl, e_max + e));
  for (std::size_t i = 1; i < r.m.size(); ++i)
    if (!(r.m[i] < r.m[i - 1])) r.monotone = false;
  if (!r.monotone) throw Error(ErrorKind::Internal, "m(E_max + eps) is not monotone in eps (solver defect)");
  r.last_value = r.m.back();
  const std::size_t k = r.m.size() - 3;
  // exact interpolation m = m0 + c1 s + c2 s^2 in s = sqrt(eps)
  const double s0 = std::sqrt(r.eps[k]), s1 = std::sqrt(r.eps[k + 1]), s2 = std::sqrt(r.eps[k + 2]);
  const double y0 = r.m[k], y1 = r.m[k + 1], y2 = r.m[k + 2];
  // Lagrange basis evaluated at s = 0
  const double l0 = (s1 * s2) / ((s0 - s1) * (s0 - s2));
  const double l1 = (s0 * s2) / ((s1 - s0) * (s1 - s2));
  const double l2 = (s0 * s1) / ((s2 - s0) * (s2 - s1));
  r.limit = l0 * y0 + l1 * y1 + l2 * y2;
  // growth without bound: last increments do not shrink
  const double d1 = r.m[k] - r.m[k + 1], d2 = r.m[k + 1] - r.m[k + 2];
  r.diverges = r.last_value < -1e6 || (d2 >= d1 && d2 > 1.0);
  return r;
}

struct PositivityReport {
  bool positive = true;
  std::size_t sign_changes = 0;
  std::optional<std::int64_t> first_sign_change;  // site n with u(n-1) u(n) <= 0
  double min_ratio = 0.0, max_ratio = 0.0;        // range of d(n) = u(n)/u(n-1)
};

inline PositivityReport positivity_check(std::span<const double> values, std::int64_t n_first) {
  require(!values.empty(), "empty solution");
  std::size_t imax = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (std::abs(values[i]) > std::abs(values[imax])) imax = i;
  require(values[imax] != 0.0, "solution is identically zero");
  const double sign = values[imax] > 0.0 ? 1.0 : -1.0;
  PositivityReport r;
  r.min_ratio = std::numeric_limits<double>::infinity();
  r.max_ratio = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(sign * values[i] > 0.0)) r.positive = false;
    if (i == 0) continue;
    const double a = sign * values[i - 1], b = sign * values[i];
    if (a * b <= 0.0 && !(a == 0.0 && b == 0.0) && (a < 0.0) != (b < 0.0)) {
      ++r.sign_changes;
      if (!r.first_sign_change) r.first_sign_change = n_first + static_cast<std::int64_t>(i);
    }
    if (a != 0.0) {
      r.min_ratio = std::min(r.min_ratio, b / a);
      r.max_ratio = std::max(r.max_ratio, b / a);
    }
  }
  return r;
}

inline PositivityReport positivity_check(const SolutionWindow& s) { return positivity_check(s.values, s.n_first); }

}  // namespace schro
