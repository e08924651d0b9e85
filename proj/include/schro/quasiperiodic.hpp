#pragma once

// Quasi-periodic background V_bg(n) = c f(theta0 + n alpha) and the ground-state
// construction over it. The projective cocycle runs in the original coordinates:
//
//   (theta, x) -> (theta + alpha, E - c f(theta) - 1/x),
//
// with (theta_{n+1}, x_n) paired, x_n = u(n+1)/u(n). Above the top of the background
// spectrum this skew product has an attracting and a repelling invariant section.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "schro/constructor.hpp"
#include "schro/errors.hpp"
#include "schro/operator_core.hpp"
#include "schro/parallel.hpp"
#include "schro/projective.hpp"

namespace schro {

inline double wrap01(double t) { return t - std::floor(t); }

/// f(theta) = sum_k cos_k cos(2 pi k theta) + sin_k sin(2 pi k theta), k = 1, 2, ...
struct QPBackground {
  std::vector<double> fourier_cos{1.0};
  std::vector<double> fourier_sin;
  double alpha = std::numbers::phi - 1.0;  // (sqrt 5 - 1) / 2
  double theta0 = 0.0;
  double c = 0.05;

  double f(double theta) const {
    const double t = wrap01(theta);
    double s = 0.0;
    for (std::size_t k = 0; k < fourier_cos.size(); ++k)
      if (fourier_cos[k] != 0.0) s += fourier_cos[k] * std::cos(2.0 * std::numbers::pi * double(k + 1) * t);
    for (std::size_t k = 0; k < fourier_sin.size(); ++k)
      if (fourier_sin[k] != 0.0) s += fourier_sin[k] * std::sin(2.0 * std::numbers::pi * double(k + 1) * t);
    return s;
  }
  /// sup |f| bound from the coefficients
  double sup_bound() const {
    double s = 0.0;
    for (double v : fourier_cos) s += std::abs(v);
    for (double v : fourier_sin) s += std::abs(v);
    return s;
  }
  double phase(std::int64_t n) const { return wrap01(theta0 + static_cast<double>(n) * alpha); }
  void validate() const {
    require(std::isfinite(c) && c >= 0.0, "coupling c must be >= 0");
    require(std::isfinite(alpha) && std::isfinite(theta0), "alpha and theta0 must be finite");
    for (double v : fourier_cos) require(std::isfinite(v), "non-finite Fourier coefficient");
    for (double v : fourier_sin) require(std::isfinite(v), "non-finite Fourier coefficient");
  }
};

inline double qp_value(const QPBackground& bg, std::int64_t n) { return bg.c * bg.f(bg.phase(n)); }

inline std::vector<double> qp_samples(const QPBackground& bg, std::int64_t n_min, std::int64_t n_max) {
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(n_max - n_min + 1));
  for (std::int64_t n = n_min; n <= n_max; ++n) v.push_back(qp_value(bg, n));
  return v;
}

struct TopEnergyEstimate {
  double e_star = 0.0;          // max over phases at the full window (a lower bound)
  double e_half = 0.0;          // same at half the window
  double extrapolated = 0.0;    // (4 E(L) - E(L/2)) / 3
  double error_bar = 0.0;       // |extrapolated - e_star|
  std::int64_t half_length = 0;
  std::size_t phase_samples = 0;
};

/// Largest Dirichlet eigenvalue of c f(theta + n alpha) on [-L, L], maximized over
/// phases theta = j / phase_samples.
inline TopEnergyEstimate top_energy(const QPBackground& bg, std::int64_t half_length = 1000,
                                    std::size_t phase_samples = 32, unsigned threads = 1) {
  bg.validate();
  require(half_length >= 100, "top_energy: window half-length must be >= 100");
  require(phase_samples >= 1, "top_energy: need at least one phase sample");
  auto top_at = [&](std::int64_t L) {
    std::vector<double> tops(phase_samples);
    parallel_for(phase_samples, threads, [&](std::size_t j) {
      QPBackground b = bg;
      b.theta0 = wrap01(bg.theta0 + static_cast<double>(j) / static_cast<double>(phase_samples));
      tops[j] = top_eigenvalue(assemble_truncation(qp_samples(b, -L, L)));
    });
    return *std::max_element(tops.begin(), tops.end());
  };
  TopEnergyEstimate r;
  r.half_length = half_length;
  r.phase_samples = phase_samples;
  r.e_star = top_at(half_length);
  r.e_half = top_at(half_length / 2);
  r.extrapolated = (4.0 * r.e_star - r.e_half) / 3.0;
  r.error_bar = std::abs(r.extrapolated - r.e_star);
  return r;
}

struct SkewPoint {
  double theta = 0.0;
  double x = 0.0;
};

inline SkewPoint skew_step(const QPBackground& bg, double E, SkewPoint p) {
  if (p.x == 0.0) throw Error(ErrorKind::IllConditioned, "skew_step: pole at x = 0");
  return {wrap01(p.theta + bg.alpha), (E - bg.c * bg.f(p.theta)) - 1.0 / p.x};
}

inline SkewPoint skew_inverse(const QPBackground& bg, double E, SkewPoint p) {
  const double th = wrap01(p.theta - bg.alpha);
  const double d = (E - bg.c * bg.f(th)) - p.x;
  if (d == 0.0) throw Error(ErrorKind::IllConditioned, "skew_inverse: pole");
  return {th, 1.0 / d};
}

enum class SectionKind { Attracting, Repelling };

/// Circle section sampled at theta_i = i / G.
class Section {
 public:
  Section() = default;
  Section(SectionKind kind, std::vector<double> values) : kind_(kind), x_(std::move(values)) {
    require(x_.size() >= 4, "section grid must have at least 4 points");
  }
  static Section constant(SectionKind kind, std::size_t G, double value) {
    return Section(kind, std::vector<double>(G, value));
  }

  SectionKind kind() const { return kind_; }
  std::size_t grid() const { return x_.size(); }
  const std::vector<double>& values() const { return x_; }
  double operator[](std::size_t i) const { return x_[i]; }

  /// Circular cubic (four-point Lagrange) interpolation.
  double operator()(double theta) const {
    const auto G = static_cast<std::int64_t>(x_.size());
    const double s = wrap01(theta) * static_cast<double>(G);
    auto i = static_cast<std::int64_t>(std::floor(s));
    double t = s - static_cast<double>(i);
    if (i >= G) {
      i -= G;
    }
    auto at = [&](std::int64_t k) { return x_[static_cast<std::size_t>(((k % G) + G) % G)]; };
    const double p0 = at(i - 1), p1 = at(i), p2 = at(i + 1), p3 = at(i + 2);
    if (p0 == p1 && p1 == p2 && p2 == p3) return p1;
    if (t == 0.0) return p1;
    const double w0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
    const double w1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    const double w2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
    const double w3 = (t + 1.0) * t * (t - 1.0) / 6.0;
    return w0 * p0 + w1 * p1 + w2 * p2 + w3 * p3;
  }

  double min() const { return *std::min_element(x_.begin(), x_.end()); }
  double max() const { return *std::max_element(x_.begin(), x_.end()); }
  bool is_constant() const {
    return std::all_of(x_.begin(), x_.end(), [&](double v) { return v == x_.front(); });
  }

 private:
  SectionKind kind_ = SectionKind::Attracting;
  std::vector<double> x_;
};

struct SectionParams {
  std::size_t grid = 4096;
  std::size_t max_iter = 2000;
  double tol = 1e-13;       // sup change between iterates at convergence
  double upper_start = 5.0;
  double lower_start = 0.5;
};

struct SectionPair {
  Section att, rep;
  double energy = 0.0;
  std::size_t iterations_att = 0, iterations_rep = 0;
  double residual_att = 0.0, residual_rep = 0.0;
  bool monotone_att = true, monotone_rep = true;
  double min_gap = 0.0;  // min (psi_att - psi_rep)
  double gap = 0.0;      // sup psi_att - inf psi_rep
};

/// sup_i |psi(theta_i + alpha) - (E - c f(theta_i) - 1/psi(theta_i))|
inline double invariance_residual(const QPBackground& bg, double E, const Section& s) {
  const std::size_t G = s.grid();
  double r = 0.0;
  for (std::size_t i = 0; i < G; ++i) {
    const double th = static_cast<double>(i) / static_cast<double>(G);
    const double img = (E - bg.c * bg.f(th)) - 1.0 / s[i];
    r = std::max(r, std::abs(s(th + bg.alpha) - img));
  }
  return r;
}

/// Attracting and repelling sections by the graph transform. psi_att is the limit of
/// push-forwards of the constant upper section, psi_rep of pull-backs of the lower one.
inline SectionPair invariant_sections(const QPBackground& bg, double E, const SectionParams& sp = {}) {
  bg.validate();
  require(sp.grid >= 16, "section grid must be >= 16");
  require(std::isfinite(E), "energy must be finite");
  const std::size_t G = sp.grid;
  SectionPair out;
  out.energy = E;

  if (bg.c == 0.0) {
    // constant background: the sections are the fixed points of F_{E-2}
    if (!(E > 2.0))
      throw Error(ErrorKind::SpectralRegime, "energy " + std::to_string(E) + " is not above the spectrum top 2");
    const auto fp = fixed_points(E - 2.0);
    out.att = Section::constant(SectionKind::Attracting, G, fp.x_att);
    out.rep = Section::constant(SectionKind::Repelling, G, fp.x_rep);
  } else {
    std::vector<double> fs(G), fs_prev(G);
    for (std::size_t i = 0; i < G; ++i) {
      const double th = static_cast<double>(i) / static_cast<double>(G);
      fs[i] = bg.c * bg.f(th);
      fs_prev[i] = bg.c * bg.f(th - bg.alpha);
    }
    auto run = [&](SectionKind kind, double start, std::size_t& iters, bool& monotone) {
      Section cur = Section::constant(kind, G, start);
      std::vector<double> next(G);
      for (iters = 1; iters <= sp.max_iter; ++iters) {
        double change = 0.0;
        for (std::size_t i = 0; i < G; ++i) {
          const double th = static_cast<double>(i) / static_cast<double>(G);
          double y;
          if (kind == SectionKind::Attracting) {
            const double prev = cur(th - bg.alpha);
            if (!(prev > 0.0))
              throw Error(ErrorKind::SpectralRegime, "graph transform left the positive half-line (E too low)");
            y = (E - fs_prev[i]) - 1.0 / prev;
            if (y > cur[i] + 1e-13) monotone = false;
          } else {
            const double d = (E - fs[i]) - cur(th + bg.alpha);
            if (!(d > 0.0))
              throw Error(ErrorKind::SpectralRegime, "graph transform left the positive half-line (E too low)");
            y = 1.0 / d;
            if (y < cur[i] - 1e-13) monotone = false;
          }
          if (!std::isfinite(y) || !(y > 0.0))
            throw Error(ErrorKind::SpectralRegime, "graph transform left the positive half-line (E too low)");
          change = std::max(change, std::abs(y - cur[i]));
          next[i] = y;
        }
        cur = Section(kind, next);
        if (change <= sp.tol) return cur;
      }
      throw Error(ErrorKind::SpectralRegime, "graph transform did not converge in " + std::to_string(sp.max_iter) +
                                                 " iterations at E = " + std::to_string(E));
    };
    out.att = run(SectionKind::Attracting, sp.upper_start, out.iterations_att, out.monotone_att);
    out.rep = run(SectionKind::Repelling, sp.lower_start, out.iterations_rep, out.monotone_rep);
  }
  out.residual_att = invariance_residual(bg, E, out.att);
  out.residual_rep = invariance_residual(bg, E, out.rep);
  out.min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < G; ++i) out.min_gap = std::min(out.min_gap, out.att[i] - out.rep[i]);
  if (!(out.min_gap > 0.0))
    throw Error(ErrorKind::SpectralRegime, "sections touch or cross at E = " + std::to_string(E));
  out.gap = out.att.max() - out.rep.min();
  return out;
}

/// Mid-level between the sections: pointwise geometric mean, exactly 1 for constant sections
/// (the two fixed points are reciprocal).
inline Section mid_level(const SectionPair& s) {
  if (s.att.is_constant() && s.rep.is_constant()) return Section::constant(SectionKind::Attracting, s.att.grid(), 1.0);
  std::vector<double> m(s.att.grid());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::sqrt(s.att[i] * s.rep[i]);
  return Section(SectionKind::Attracting, std::move(m));
}

/// Region between two sections (or levels) at each phase.
struct Cylinder {
  std::shared_ptr<const Section> lower, upper;
  double lower_shift = 0.0, upper_shift = 0.0;
  Interval at(double theta) const { return {(*lower)(theta) + lower_shift, (*upper)(theta) + upper_shift}; }
  double margin() const {
    double m = std::numeric_limits<double>::infinity();
    const std::size_t G = lower->grid();
    for (std::size_t i = 0; i < G; ++i) {
      const double th = static_cast<double>(i) / static_cast<double>(G);
      const Interval iv = at(th);
      m = std::min(m, iv.hi - iv.lo);
    }
    return m;
  }
};

/// U = [mid + delta, psi_att] for x_n, U_hat = [psi_rep, mid - delta], indexed by
/// the phase theta_{n+1} paired with x_n.
class QPGeometry {
 public:
  QPGeometry(QPBackground bg, double energy, double lambda, const SectionPair& sections, double delta)
      : bg_(std::move(bg)), energy_(energy), lambda_(lambda) {
    auto att = std::make_shared<const Section>(sections.att);
    auto rep = std::make_shared<const Section>(sections.rep);
    auto mid = std::make_shared<const Section>(mid_level(sections));
    U_ = {mid, att, delta, 0.0};
    Uhat_ = {rep, mid, 0.0, -delta};
  }
  double energy() const { return energy_; }
  double lambda() const { return lambda_; }
  double background(std::int64_t site) const { return qp_value(bg_, site); }
  Interval upper(std::int64_t n) const { return U_.at(bg_.phase(n + 1)); }
  Interval lower(std::int64_t n) const { return Uhat_.at(bg_.phase(n + 1)); }
  const Cylinder& U() const { return U_; }
  const Cylinder& Uhat() const { return Uhat_; }
  const QPBackground& background_desc() const { return bg_; }

 private:
  QPBackground bg_;
  double energy_, lambda_;
  Cylinder U_, Uhat_;
};

struct QPParams {
  double lambda = 0.1;
  double a = 1e-3;
  // Default 0.35 sqrt(lambda): the geometric-mean mid-level is only approximately
  // neutral for the lambda-site map, and a band of width ~sqrt(lambda) absorbs that.
  std::optional<double> delta;
  std::int64_t n_back = 200;
  std::int64_t n_fwd = 200;
  std::optional<double> x0;     // default: bottom of U at the phase of site 1
  ChoicePolicy policy = ChoicePolicy::MaxMargin;
  std::vector<std::uint8_t> free_bits;
  std::uint64_t seed = 0;
  SectionParams sections;
  std::size_t cylinder_samples = 16;  // x samples per grid phase in the option check
  double delta_value() const { return delta.value_or(0.35 * std::sqrt(lambda)); }
};

struct CylinderCheck {
  std::size_t tested = 0;
  std::size_t empty_backward = 0, empty_forward = 0;
  double min_width_U = 0.0, min_width_Uhat = 0.0;
  SkewPoint worst_backward{}, worst_forward{};
  bool holds() const { return tested > 0 && empty_backward == 0 && empty_forward == 0 && min_width_U > 0.0 &&
                              min_width_Uhat > 0.0; }
};

/// Runtime analog of the covering check: every sampled (theta, x) in U has a backward
/// option into U and every sampled point of U_hat a forward option into U_hat.
inline CylinderCheck cylinder_check(const QPGeometry& g, std::size_t samples_per_phase) {
  require(samples_per_phase >= 2, "cylinder check needs >= 2 samples per phase");
  const auto& bg = g.background_desc();
  const double E = g.energy(), lam = g.lambda();
  CylinderCheck rep;
  rep.min_width_U = g.U().margin();
  rep.min_width_Uhat = g.Uhat().margin();
  if (!(rep.min_width_U > 0.0) || !(rep.min_width_Uhat > 0.0)) return rep;
  const std::size_t G = g.U().lower->grid();
  for (std::size_t i = 0; i < G; ++i) {
    const double th = static_cast<double>(i) / static_cast<double>(G);
    const Interval u = g.U().at(th), uh = g.Uhat().at(th);
    const Interval u_prev = g.U().at(th - bg.alpha), uh_next = g.Uhat().at(th + bg.alpha);
    const double v_here = bg.c * bg.f(th - bg.alpha);  // site whose map produces the state at th
    const double v_next = bg.c * bg.f(th);
    for (std::size_t k = 0; k < samples_per_phase; ++k) {
      const double s = static_cast<double>(k) / static_cast<double>(samples_per_phase - 1);
      ++rep.tested;
      const double x = u.lo + s * (u.hi - u.lo);
      bool ok = false;
      for (double w : {0.0, lam}) {
        const double d = ((E - v_here) - w) - x;
        if (d > 0.0 && u_prev.contains(1.0 / d, kMembershipSlack)) ok = true;
      }
      if (!ok && rep.empty_backward++ == 0) rep.worst_backward = {th, x};
      const double y = uh.lo + s * (uh.hi - uh.lo);
      ok = false;
      for (double w : {0.0, lam})
        if (uh_next.contains(((E - v_next) - w) - 1.0 / y, kMembershipSlack)) ok = true;
      if (!ok && rep.empty_forward++ == 0) rep.worst_forward = {th, y};
    }
  }
  return rep;
}

struct QPConstruction {
  GroundStateCertificate certificate;
  SectionPair sections;
  CylinderCheck cylinders;
};

/// Ground state at E = E_star + lambda - a over the quasi-periodic background.
inline QPConstruction qp_construct(const QPBackground& bg, double e_star, const QPParams& p) {
  bg.validate();
  require(std::isfinite(p.lambda) && p.lambda > 0.0, "lambda must be > 0");
  require(std::isfinite(p.a) && p.a > 0.0 && p.a < p.lambda, "need 0 < a < lambda");
  require(lambda_admissible(p.lambda), "lambda = " + std::to_string(p.lambda) + " is not admissible");
  require(p.delta_value() > 0.0, "delta must be > 0");
  require(std::isfinite(e_star), "E_star must be finite");
  const double E = (e_star + p.lambda) - p.a;

  QPConstruction out;
  out.sections = invariant_sections(bg, E, p.sections);
  const QPGeometry geo(bg, E, p.lambda, out.sections, p.delta_value());
  out.cylinders = cylinder_check(geo, p.cylinder_samples);
  if (!out.cylinders.holds()) {
    const auto& w = out.cylinders.empty_backward ? out.cylinders.worst_backward : out.cylinders.worst_forward;
    throw Error(ErrorKind::ParametersInadmissible,
                "cylinder option set empty (" + std::to_string(out.cylinders.empty_backward) + " backward, " +
                    std::to_string(out.cylinders.empty_forward) + " forward failures; first at theta = " +
                    std::to_string(w.theta) + ", x = " + std::to_string(w.x) + ")");
  }
  const ChainRules<QPGeometry> rules(geo);
  const double x0 = p.x0.value_or(geo.upper(0).lo);
  out.certificate = build_chain(rules, x0, p.n_back, p.n_fwd, p.policy, p.free_bits, p.seed);
  out.certificate.a = p.a;
  out.certificate.delta = p.delta_value();
  out.certificate.e_top = e_star;
  return out;
}

/// One qp_construct + verify per grid value of a.
inline SweepReport qp_sweep_interval(const QPBackground& bg, double e_star, std::span<const double> a_grid,
                                     const QPParams& base, const VerifyTolerances& tol = {}, unsigned threads = 1) {
  SweepReport rep;
  rep.rows.resize(a_grid.size());
  parallel_for(a_grid.size(), threads, [&](std::size_t i) {
    QPParams p = base;
    p.a = a_grid[i];
    SweepRow& row = rep.rows[i];
    row.a = p.a;
    row.energy = (e_star + p.lambda) - p.a;
    try {
      const auto r = qp_construct(bg, e_star, p);
      row = sweep_row_from(p.a, r.certificate, verify_certificate(r.certificate, tol));
      row.section_residual = std::max(r.sections.residual_att, r.sections.residual_rep);
      row.section_gap = r.sections.gap;
    } catch (const Error& e) {
      row.error = e.what();
    }
  });
  return rep;
}

}  // namespace schro
