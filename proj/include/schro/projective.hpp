#pragma once

// Projective action of the transfer matrices in the cotangent coordinate
// x = u(n+1)/u(n), where Pi = ((2 + a, -1), (1, 0)) acts as F_a(x) = 2 + a - 1/x.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "schro/errors.hpp"

namespace schro {

/// Member of the family F_a(x) = 2 + a - 1/x.
struct MoebiusParam {
  double a = 0.0;
};

inline double moebius_apply(MoebiusParam p, double x) {
  if (x == 0.0) throw Error(ErrorKind::IllConditioned, "moebius_apply: pole at x = 0");
  return 2.0 + p.a - 1.0 / x;
}

/// F_a^{-1}(x) = 1 / (2 + a - x).
inline double moebius_inverse(MoebiusParam p, double x) {
  const double d = 2.0 + p.a - x;
  if (d == 0.0) throw Error(ErrorKind::IllConditioned, "moebius_inverse: pole at x = 2 + a");
  return 1.0 / d;
}

/// F_a'(x) = 1/x^2, the same for every a.
inline double moebius_derivative(MoebiusParam, double x) {
  if (x == 0.0) throw Error(ErrorKind::IllConditioned, "moebius_derivative: pole at x = 0");
  return 1.0 / (x * x);
}

struct FixedPoints {
  double x_rep = 1.0;
  double x_att = 1.0;
};

/// Fixed points 1 + a/2 -+ sqrt(a + a^2/4) of F_a, a > 0. Roots of x^2 - (2+a)x + 1.
inline FixedPoints fixed_points(double a) {
  require(a > 0.0, "fixed_points: need a > 0 (a = 0 is the degenerate double point 1)");
  const double r = std::sqrt(a + 0.25 * a * a);
  const double x_att = 1.0 + 0.5 * a + r;
  // x_rep = 1/x_att avoids cancellation for small a
  return {1.0 / x_att, x_att};
}

/// The two inequalities that make the trapping-interval construction work.
struct Admissibility {
  double first = 0.0;   // (1-l) sqrt(l + l^2/4) - l/2 - l^2/2
  double second = 0.0;  // sqrt(l + l^2/4) - 3l/2
  bool ok() const { return first > 0.0 && second > 0.0; }
};

inline Admissibility lambda_admissibility(double lambda) {
  require(lambda > 0.0, "lambda must be > 0");
  const double r = std::sqrt(lambda + 0.25 * lambda * lambda);
  return {(1.0 - lambda) * r - 0.5 * lambda - 0.5 * lambda * lambda, r - 1.5 * lambda};
}

inline bool lambda_admissible(double lambda) { return lambda_admissibility(lambda).ok(); }

/// I = [1 + delta, x_att(lambda - a)] and I_hat = [x_rep(lambda - a), 1 - delta].
struct TrappingIntervals {
  double lambda = 0.0, a = 0.0, delta = 0.0;
  double I_lo = 0.0, I_hi = 0.0;
  double Ihat_lo = 0.0, Ihat_hi = 0.0;

  bool in_I(double x, double slack = 0.0) const { return x >= I_lo - slack && x <= I_hi + slack; }
  bool in_Ihat(double x, double slack = 0.0) const { return x >= Ihat_lo - slack && x <= Ihat_hi + slack; }
  double I_mid() const { return 0.5 * (I_lo + I_hi); }
};

inline TrappingIntervals trapping_intervals(double lambda, double a, double delta) {
  require(lambda > 0.0, "lambda must be > 0");
  require(a > 0.0 && a < lambda, "need 0 < a < lambda");
  require(delta > 0.0, "delta must be > 0");
  const auto fp = fixed_points(lambda - a);
  TrappingIntervals t{lambda, a, delta, 1.0 + delta, fp.x_att, fp.x_rep, 1.0 - delta};
  return t;
}

/// Slack for the covering end conditions; an endpoint of I or I_hat is a fixed
/// point of one map, so those comparisons are equalities up to rounding.
inline constexpr double kCoverSlack = 1e-12;

struct CoverMargins {
  double left = 0.0;     // lower image starts at or below lo
  double overlap = 0.0;  // the two images meet
  double right = 0.0;    // upper image reaches hi
  bool covers() const { return left > -kCoverSlack && overlap > -kCoverSlack && right > -kCoverSlack; }
};

struct CoveringReport {
  TrappingIntervals intervals;
  bool I_nonempty = false, Ihat_nonempty = false;
  // I subset F_{-a}(I) u F_{lambda-a}(I); both maps are increasing, so each image is
  // [F(lo), F(hi)] and the covering reduces to endpoint comparisons.
  CoverMargins backward;
  // I_hat subset F_{-a}^{-1}(I_hat) u F_{lambda-a}^{-1}(I_hat)
  CoverMargins forward;
  // Margins away from the fixed-point end (x_att for I, x_rep for I_hat); these
  // are strictly positive when the covering holds robustly.
  double backward_margin = 0.0;
  double forward_margin = 0.0;
  bool holds() const {
    return I_nonempty && Ihat_nonempty && backward.covers() && forward.covers() && backward_margin > 0.0 &&
           forward_margin > 0.0;
  }
};

namespace detail {

inline CoverMargins cover_margin(double lo, double hi, double a1, double b1, double a2, double b2) {
  if (a1 > a2) {
    std::swap(a1, a2);
    std::swap(b1, b2);
  }
  return {lo - a1, b1 - a2, std::max(b1, b2) - hi};
}

}  // namespace detail

/// Direct endpoint verification of the two covering statements behind the
/// backward (I) and forward (I_hat) option steps.
inline CoveringReport covering_check(double lambda, double a, double delta) {
  require(lambda > 0.0, "lambda must be > 0");
  require(lambda_admissible(lambda), "lambda is not admissible");
  require(a > 0.0 && a < lambda, "need 0 < a < lambda");
  require(delta > 0.0, "delta must be > 0");
  CoveringReport rep;
  rep.intervals = trapping_intervals(lambda, a, delta);
  const auto& t = rep.intervals;
  rep.I_nonempty = t.I_lo < t.I_hi;
  rep.Ihat_nonempty = t.Ihat_lo < t.Ihat_hi;
  if (!rep.I_nonempty || !rep.Ihat_nonempty) {
    rep.backward_margin = rep.forward_margin = -std::numeric_limits<double>::infinity();
    rep.backward.left = rep.forward.left = -std::numeric_limits<double>::infinity();
    return rep;
  }
  const MoebiusParam lam{-a}, zero{lambda - a};
  rep.backward = detail::cover_margin(t.I_lo, t.I_hi, moebius_apply(lam, t.I_lo), moebius_apply(lam, t.I_hi),
                                      moebius_apply(zero, t.I_lo), moebius_apply(zero, t.I_hi));
  rep.forward =
      detail::cover_margin(t.Ihat_lo, t.Ihat_hi, moebius_inverse(lam, t.Ihat_lo), moebius_inverse(lam, t.Ihat_hi),
                           moebius_inverse(zero, t.Ihat_lo), moebius_inverse(zero, t.Ihat_hi));
  rep.backward_margin = std::min(rep.backward.left, rep.backward.overlap);
  rep.forward_margin = std::min(rep.forward.overlap, rep.forward.right);
  return rep;
}

inline CoveringReport require_covering(double lambda, double a, double delta) {
  auto rep = covering_check(lambda, a, delta);
  if (!rep.holds())
    throw Error(ErrorKind::ParametersInadmissible,
                "covering fails for lambda=" + std::to_string(lambda) + " a=" + std::to_string(a) +
                    " delta=" + std::to_string(delta) + " (backward margin " + std::to_string(rep.backward_margin) +
                    ", forward margin " + std::to_string(rep.forward_margin) + ")");
  return rep;
}

// ---------------------------------------------------------------------------
// Orbit classification at the top of the Bernoulli spectrum, E = 2 + lambda

enum class OrbitCase {
  EntersIForward,          // forward orbit reaches [1, x_att]: forward derivatives bounded by 1
  EntersIhatBackward,      // backward orbit reaches [x_rep, 1]: backward derivatives bounded by 1
  AboveAttContracting,     // forward orbit stays above x_att: contraction
  BelowRepContradiction,   // forward orbit drops below x_rep: no positive solution
  Unclassified,            // none of the above within the horizon
};

inline const char* to_string(OrbitCase c) {
  switch (c) {
    case OrbitCase::EntersIForward: return "enters_I_forward";
    case OrbitCase::EntersIhatBackward: return "enters_Ihat_backward";
    case OrbitCase::AboveAttContracting: return "above_x_att_contracting";
    case OrbitCase::BelowRepContradiction: return "hits_below_x_rep_contradiction";
    case OrbitCase::Unclassified: return "unclassified";
  }
  return "unknown";
}

inline bool has_bounded_derivative(OrbitCase c) {
  return c == OrbitCase::EntersIForward || c == OrbitCase::EntersIhatBackward ||
         c == OrbitCase::AboveAttContracting;
}

struct OrbitClassification {
  OrbitCase tag = OrbitCase::Unclassified;
  std::int64_t entry_index = 0;
  // sup over the tested window of the derivative product on the bounded side
  double derivative_bound = std::numeric_limits<double>::infinity();
};

/// Classifies x_n = F_{lambda - omega(n)}(x_{n-1}) with x_0 = x0 for omega in {0, lambda}.
/// `omega` covers the sites -horizon .. horizon (length 2*horizon + 1); the
/// forward orbit uses sites 1..horizon, the backward orbit sites 0, -1, ..., 1-horizon.
inline OrbitClassification classify_positive_orbit(double lambda, std::span<const double> omega, double x0,
                                                   std::int64_t horizon) {
  require(lambda > 0.0, "lambda must be > 0");
  require(x0 > 0.0, "x0 must be positive");
  require(horizon >= 1, "horizon must be >= 1");
  require(omega.size() == static_cast<std::size_t>(2 * horizon + 1), "omega must cover [-horizon, horizon]");
  auto site = [&](std::int64_t n) { return omega[static_cast<std::size_t>(n + horizon)]; };
  const auto fp = fixed_points(lambda);

  std::vector<double> fwd{x0};
  for (std::int64_t n = 1; n <= horizon; ++n) {
    const double x = fwd.back();
    if (x < fp.x_rep) {
      return {OrbitCase::BelowRepContradiction, n - 1, std::numeric_limits<double>::infinity()};
    }
    fwd.push_back(moebius_apply({lambda - site(n)}, x));
  }
  if (fwd.back() < fp.x_rep)
    return {OrbitCase::BelowRepContradiction, horizon, std::numeric_limits<double>::infinity()};

  // derivative products from index k onward along the forward orbit
  auto forward_bound = [&](std::size_t k) {
    double prod = 1.0, sup = 1.0;
    for (std::size_t j = k; j + 1 < fwd.size(); ++j) {
      prod *= moebius_derivative({}, fwd[j]);
      sup = std::max(sup, prod);
    }
    return sup;
  };
  for (std::size_t k = 0; k < fwd.size(); ++k) {
    if (fwd[k] >= 1.0 && fwd[k] <= fp.x_att) {
      return {OrbitCase::EntersIForward, static_cast<std::int64_t>(k), forward_bound(k)};
    }
  }

  // backward: x_{n-1} = F^{-1}_{lambda - omega(n)}(x_n), derivative of the inverse is x_{n-1}^2
  std::vector<double> bwd{x0};
  for (std::int64_t n = 0; n > -horizon; --n) {
    const double x = bwd.back();
    const double d = 2.0 + (lambda - site(n)) - x;
    if (d <= 0.0) break;  // backward orbit leaves the positive half-line
    bwd.push_back(1.0 / d);
  }
  for (std::size_t k = 0; k < bwd.size(); ++k) {
    if (bwd[k] >= fp.x_rep && bwd[k] <= 1.0) {
      double prod = 1.0, sup = 1.0;
      for (std::size_t j = k + 1; j < bwd.size(); ++j) {
        prod *= bwd[j] * bwd[j];
        sup = std::max(sup, prod);
      }
      return {OrbitCase::EntersIhatBackward, -static_cast<std::int64_t>(k), sup};
    }
  }

  if (std::all_of(fwd.begin(), fwd.end(), [&](double x) { return x > fp.x_att; })) {
    return {OrbitCase::AboveAttContracting, 0, forward_bound(0)};
  }
  return {OrbitCase::Unclassified, 0, std::numeric_limits<double>::infinity()};
}

}  // namespace schro
