#pragma once

// Ground states at the top of the spectrum for potentials V = V_bg + omega,
// omega(n) in {0, lambda}, at energy E = E_top + lambda - a.
//
// Ratios x_n = u(n+1)/u(n) obey x_n = (E - V(n)) - 1/x_{n-1}. Starting from x_0 in
// the upper region U, the sites n = 0, -1, ... are chosen so that the backward
// iterates stay in U, a run of lambda-sites carries the forward orbit into the
// lower region L, and the remaining forward sites keep it there. Ratios above 1
// on the left and below 1 on the right give a positive, two-sided decaying u.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "schro/errors.hpp"
#include "schro/operator_core.hpp"
#include "schro/parallel.hpp"
#include "schro/projective.hpp"
#include "schro/transfer_cocycle.hpp"

namespace schro {

enum class Choice : std::uint8_t { Zero = 0, Lambda = 1 };

inline const char* to_string(Choice c) { return c == Choice::Zero ? "zero" : "lambda"; }

enum class ChoicePolicy { MaxMargin, PreferZero, PreferLambda, Enumerate };

inline const char* to_string(ChoicePolicy p) {
  switch (p) {
    case ChoicePolicy::MaxMargin: return "max_margin";
    case ChoicePolicy::PreferZero: return "prefer_zero";
    case ChoicePolicy::PreferLambda: return "prefer_lambda";
    case ChoicePolicy::Enumerate: return "enumerate";
  }
  return "unknown";
}

inline ChoicePolicy parse_policy(const std::string& s) {
  if (s == "max_margin") return ChoicePolicy::MaxMargin;
  if (s == "prefer_zero") return ChoicePolicy::PreferZero;
  if (s == "prefer_lambda") return ChoicePolicy::PreferLambda;
  if (s == "enumerate") return ChoicePolicy::Enumerate;
  throw Error(ErrorKind::InvalidInput, "unknown choice policy '" + s + "'");
}

/// Admissible choices at one step, with the signed depth of each image inside its target.
struct OptionSet {
  bool zero = false, lambda = false;
  double zero_margin = -std::numeric_limits<double>::infinity();
  double lambda_margin = -std::numeric_limits<double>::infinity();
  double zero_image = 0.0, lambda_image = 0.0;

  bool empty() const { return !zero && !lambda; }
  int count() const { return int(zero) + int(lambda); }
  bool has(Choice c) const { return c == Choice::Zero ? zero : lambda; }
  double image(Choice c) const { return c == Choice::Zero ? zero_image : lambda_image; }
  double margin(Choice c) const { return c == Choice::Zero ? zero_margin : lambda_margin; }
};

/// Membership tolerance for interval and cylinder tests.
inline constexpr double kMembershipSlack = 1e-12;

namespace detail {
inline double depth_in(Interval iv, double x) { return std::min(x - iv.lo, iv.hi - x); }
}  // namespace detail

/// Step rules shared by the constant and the quasi-periodic constructions.
///
/// A Geometry supplies
///   double energy() const;
///   double lambda() const;
///   double background(std::int64_t site) const;   // V_bg(site)
///   Interval upper(std::int64_t n) const;          // admissible x_n on the backward side
///   Interval lower(std::int64_t n) const;          // admissible x_n on the forward side
template <class Geometry>
class ChainRules {
 public:
  explicit ChainRules(const Geometry& g) : g_(g) {}

  const Geometry& geometry() const { return g_; }
  double site_value(Choice c) const { return c == Choice::Zero ? 0.0 : g_.lambda(); }

  /// x_n from x_{n-1} through site n.
  double forward(std::int64_t n, double x_prev, Choice c) const {
    if (x_prev == 0.0) throw Error(ErrorKind::IllConditioned, "ratio pole at site " + std::to_string(n));
    const double base = g_.energy() - g_.background(n);
    return (base - site_value(c)) - 1.0 / x_prev;
  }
  /// x_{n-1} from x_n through site n; nullopt if the preimage is not positive.
  std::optional<double> backward(std::int64_t n, double x, Choice c) const {
    const double base = g_.energy() - g_.background(n);
    const double d = (base - site_value(c)) - x;
    if (!(d > 0.0)) return std::nullopt;
    return 1.0 / d;
  }

  bool in_upper(std::int64_t n, double x) const { return g_.upper(n).contains(x, kMembershipSlack); }
  bool in_lower(std::int64_t n, double x) const { return g_.lower(n).contains(x, kMembershipSlack); }

  /// Choices at site n keeping x_{n-1} in the upper region, given x_n.
  OptionSet backward_options(std::int64_t n, double x) const {
    OptionSet o;
    const Interval target = g_.upper(n - 1);
    for (Choice c : {Choice::Zero, Choice::Lambda}) {
      const auto y = backward(n, x, c);
      if (!y) continue;
      const bool ok = target.contains(*y, kMembershipSlack);
      set(o, c, ok, *y, detail::depth_in(target, *y));
    }
    return o;
  }

  /// Choices at site n + 1 keeping x_{n+1} in the lower region, given x_n.
  OptionSet forward_options(std::int64_t n, double x) const {
    OptionSet o;
    const Interval target = g_.lower(n + 1);
    for (Choice c : {Choice::Zero, Choice::Lambda}) {
      const double y = forward(n + 1, x, c);
      set(o, c, target.contains(y, kMembershipSlack), y, detail::depth_in(target, y));
    }
    return o;
  }

 private:
  static void set(OptionSet& o, Choice c, bool ok, double y, double m) {
    if (c == Choice::Zero) {
      o.zero = ok;
      o.zero_image = y;
      o.zero_margin = m;
    } else {
      o.lambda = ok;
      o.lambda_image = y;
      o.lambda_margin = m;
    }
  }

  Geometry g_;
};

/// Resolves a policy among admissible options. `bit` supplies free choices for Enumerate.
template <class BitSource>
Choice resolve_choice(const OptionSet& o, ChoicePolicy p, BitSource&& bit) {
  if (o.count() == 1) return o.zero ? Choice::Zero : Choice::Lambda;
  switch (p) {
    case ChoicePolicy::PreferZero: return Choice::Zero;
    case ChoicePolicy::PreferLambda: return Choice::Lambda;
    case ChoicePolicy::Enumerate: return bit() ? Choice::Lambda : Choice::Zero;
    case ChoicePolicy::MaxMargin:
    default: return o.lambda_margin > o.zero_margin ? Choice::Lambda : Choice::Zero;
  }
}

// ---------------------------------------------------------------------------
// Constant background

struct ConstructorParams {
  double lambda = 0.1;
  double a = 1e-3;
  std::optional<double> delta;  // default: a
  std::int64_t n_back = 200;
  std::int64_t n_fwd = 200;
  std::optional<double> x0;     // default: bottom of I, 1 + delta
  ChoicePolicy policy = ChoicePolicy::MaxMargin;
  std::vector<std::uint8_t> free_bits;  // leading free choices under Enumerate
  std::uint64_t seed = 0;               // free choices past free_bits under Enumerate

  double delta_value() const { return delta.value_or(a); }
};

/// Constant background at the top of the free spectrum, E = 2 + lambda - a.
/// Zero sites act by F_{lambda-a}, lambda sites by F_{-a}.
class ConstantGeometry {
 public:
  ConstantGeometry(double lambda, double a, double delta) : lambda_(lambda), energy_(2.0 + lambda - a) {
    // fixed points of the zero-site map at this energy; E - 2 equals lambda - a up to rounding
    const auto fp = fixed_points(energy_ - 2.0);
    upper_ = {1.0 + delta, fp.x_att};
    lower_ = {fp.x_rep, 1.0 - delta};
  }
  double energy() const { return energy_; }
  double lambda() const { return lambda_; }
  double background(std::int64_t) const { return 0.0; }
  Interval upper(std::int64_t) const { return upper_; }
  Interval lower(std::int64_t) const { return lower_; }

 private:
  double lambda_, energy_;
  Interval upper_, lower_;
};

enum class StepPhase : std::uint8_t { Seed, Backward, Transit, Forward };

inline const char* to_string(StepPhase s) {
  switch (s) {
    case StepPhase::Seed: return "seed";
    case StepPhase::Backward: return "backward";
    case StepPhase::Transit: return "transit";
    case StepPhase::Forward: return "forward";
  }
  return "unknown";
}

struct TraceStep {
  std::int64_t site = 0;
  StepPhase phase = StepPhase::Seed;
  int options = 0;  // 1 = forced, 2 = free
  Choice choice = Choice::Zero;
  double x_in = 0.0, x_out = 0.0;
};

/// Window [-n_back, n_fwd] of a ground state. Ratios and eigenfunction extend one
/// site beyond each end: ratio[k] = x_{-n_back-1+k}, u[k] = u(-n_back-1+k).
struct GroundStateCertificate {
  double lambda = 0.0, a = 0.0, delta = 0.0;
  double energy = 0.0;
  double e_top = 2.0;  // top of the background spectrum used to set the energy
  std::int64_t n_back = 0, n_fwd = 0;
  std::vector<double> background;        // V_bg on the window
  std::vector<std::uint8_t> word;        // 1 = lambda site
  std::vector<double> ratios;            // length window + 1
  std::vector<double> u;                 // length window + 2, u(0) = 1
  std::vector<double> log_u;
  std::int64_t transit_steps = 0;
  std::vector<TraceStep> trace;
  std::string policy = "max_margin";

  // diagnostics filled by the constructor
  double decay_rate_back = 0.0, decay_rate_fwd = 0.0;
  double min_entry = 0.0;
  double residual = 0.0;

  std::int64_t n_min() const { return -n_back; }
  std::int64_t n_max() const { return n_fwd; }
  std::size_t size() const { return word.size(); }
  double u_at(std::int64_t n) const { return u.at(static_cast<std::size_t>(n + n_back + 1)); }

  RealizationWindow realization() const {
    std::vector<double> w(word.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = word[i] ? lambda : 0.0;
    return RealizationWindow(-n_back, background, std::move(w));
  }
};

namespace detail {

/// Least-squares slope of y against x.
inline double ls_slope(std::span<const double> xs, std::span<const double> ys) {
  const auto n = static_cast<double>(xs.size());
  if (xs.size() < 2) return 0.0;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxx > 0 ? sxy / sxx : 0.0;
}

}  // namespace detail

/// Decay rates of log u over the outer half of each side of the window:
/// back = slope of log u against -n on [-n_back, -n_back/2], fwd = -slope on [n_fwd/2, n_fwd].
inline std::pair<double, double> fitted_decay_rates(const GroundStateCertificate& c) {
  std::vector<double> xs, ys;
  for (std::int64_t n = -c.n_back; n <= -c.n_back / 2; ++n) {
    xs.push_back(static_cast<double>(-n));
    ys.push_back(c.log_u[static_cast<std::size_t>(n + c.n_back + 1)]);
  }
  const double back = -detail::ls_slope(xs, ys);
  xs.clear();
  ys.clear();
  for (std::int64_t n = c.n_fwd / 2; n <= c.n_fwd; ++n) {
    xs.push_back(static_cast<double>(n));
    ys.push_back(c.log_u[static_cast<std::size_t>(n + c.n_back + 1)]);
  }
  const double fwd = -detail::ls_slope(xs, ys);
  return {back, fwd};
}

/// Fills u, log_u and the diagnostics from the ratios, anchoring u(0) = 1.
inline void reconstruct_eigenfunction(GroundStateCertificate& c) {
  const std::size_t len = c.ratios.size() + 1;
  c.u.assign(len, 0.0);
  c.log_u.assign(len, 0.0);
  const auto zero = static_cast<std::size_t>(c.n_back + 1);
  c.u[zero] = 1.0;
  // u(n+1) = x_n u(n); ratio index of x_n is n + n_back + 1, same as u(n)
  for (std::size_t k = zero; k + 1 < len; ++k) {
    c.log_u[k + 1] = c.log_u[k] + std::log(c.ratios[k]);
    c.u[k + 1] = c.u[k] * c.ratios[k];
  }
  for (std::size_t k = zero; k > 0; --k) {
    c.log_u[k - 1] = c.log_u[k] - std::log(c.ratios[k - 1]);
    c.u[k - 1] = c.u[k] / c.ratios[k - 1];
  }
  for (std::size_t k = 0; k < len; ++k)
    if (std::abs(c.log_u[k]) > 300.0) c.u[k] = std::exp(c.log_u[k]);

  c.min_entry = *std::min_element(c.u.begin(), c.u.end());
  const auto [b, f] = fitted_decay_rates(c);
  c.decay_rate_back = b;
  c.decay_rate_fwd = f;
  const auto res = recurrence_residuals(c.energy, c.realization(), c.u);
  c.residual = res.empty() ? 0.0 : *std::max_element(res.begin(), res.end());
}

/// Runs the backward pass, transit and forward pass for any geometry.
/// `x0` is x_0 and must lie in the upper region.
template <class Geometry>
GroundStateCertificate build_chain(const ChainRules<Geometry>& rules, double x0, std::int64_t n_back,
                                   std::int64_t n_fwd, ChoicePolicy policy, std::span<const std::uint8_t> free_bits,
                                   std::uint64_t seed) {
  require(n_back >= 1 && n_fwd >= 1, "window half-lengths must be >= 1");
  if (!rules.in_upper(0, x0))
    throw Error(ErrorKind::InvalidInput, "seed x0 = " + std::to_string(x0) + " is not in the upper region");

  const auto& g = rules.geometry();
  std::size_t bit_pos = 0;
  auto rng = substream(seed, 0x6f72);
  auto next_bit = [&]() -> bool {
    if (bit_pos < free_bits.size()) return free_bits[bit_pos++] != 0;
    ++bit_pos;
    return (rng() >> 63) != 0;
  };

  GroundStateCertificate c;
  c.lambda = g.lambda();
  c.energy = g.energy();
  c.n_back = n_back;
  c.n_fwd = n_fwd;
  c.policy = to_string(policy);
  const auto len = static_cast<std::size_t>(n_back + n_fwd + 1);
  c.word.assign(len, 0);
  c.background.resize(len);
  for (std::int64_t n = -n_back; n <= n_fwd; ++n) c.background[static_cast<std::size_t>(n + n_back)] = g.background(n);
  c.ratios.assign(len + 1, 0.0);
  auto ratio_slot = [&](std::int64_t n) -> double& { return c.ratios[static_cast<std::size_t>(n + n_back + 1)]; };
  auto word_slot = [&](std::int64_t n) -> std::uint8_t& { return c.word[static_cast<std::size_t>(n + n_back)]; };

  ratio_slot(0) = x0;
  c.trace.push_back({0, StepPhase::Seed, 0, Choice::Zero, x0, x0});

  // backward: site n determines x_{n-1}
  double x = x0;
  for (std::int64_t n = 0; n >= -n_back; --n) {
    const OptionSet o = rules.backward_options(n, x);
    if (o.empty())
      throw Error(ErrorKind::Internal, "no backward option at site " + std::to_string(n) + ", x = " +
                                           std::to_string(x) + " (covering guarantee violated)");
    const Choice ch = resolve_choice(o, policy, next_bit);
    const double y = o.image(ch);
    word_slot(n) = static_cast<std::uint8_t>(ch);
    ratio_slot(n - 1) = y;
    c.trace.push_back({n, StepPhase::Backward, o.count(), ch, x, y});
    x = y;
  }

  // transit: lambda sites until the orbit enters the lower region
  x = x0;
  std::int64_t n = 1;
  for (; n <= n_fwd; ++n) {
    if (rules.in_lower(n - 1, x)) break;
    const double y = rules.forward(n, x, Choice::Lambda);
    if (y < g.lower(n).lo - kMembershipSlack)
      throw Error(ErrorKind::ParametersInadmissible,
                  "transit overshoots the lower region at site " + std::to_string(n) + " (x = " + std::to_string(y) +
                      "); a is too large for the region width");
    word_slot(n) = 1;
    ratio_slot(n) = y;
    c.trace.push_back({n, StepPhase::Transit, 1, Choice::Lambda, x, y});
    ++c.transit_steps;
    x = y;
  }

  // forward: site n determines x_n from x_{n-1}
  for (; n <= n_fwd; ++n) {
    const OptionSet o = rules.forward_options(n - 1, x);
    if (o.empty())
      throw Error(ErrorKind::Internal, "no forward option at site " + std::to_string(n) + ", x = " +
                                           std::to_string(x) + " (covering guarantee violated)");
    const Choice ch = resolve_choice(o, policy, next_bit);
    const double y = o.image(ch);
    word_slot(n) = static_cast<std::uint8_t>(ch);
    ratio_slot(n) = y;
    c.trace.push_back({n, StepPhase::Forward, o.count(), ch, x, y});
    x = y;
  }

  reconstruct_eigenfunction(c);
  return c;
}

/// Validates constant-background parameters; throws on violation.
inline CoveringReport validate_params(const ConstructorParams& p) {
  require(std::isfinite(p.lambda) && p.lambda > 0.0, "lambda must be > 0");
  require(std::isfinite(p.a) && p.a > 0.0 && p.a < p.lambda, "need 0 < a < lambda");
  if (!lambda_admissible(p.lambda)) {
    const auto adm = lambda_admissibility(p.lambda);
    throw Error(ErrorKind::InvalidInput, "lambda = " + std::to_string(p.lambda) +
                                             " is not admissible (condition values " + std::to_string(adm.first) +
                                             ", " + std::to_string(adm.second) + ")");
  }
  require(p.delta_value() > 0.0, "delta must be > 0");
  require(p.n_back >= 1 && p.n_fwd >= 1, "window half-lengths must be >= 1");
  return require_covering(p.lambda, p.a, p.delta_value());
}

inline ChainRules<ConstantGeometry> constant_rules(const ConstructorParams& p) {
  return ChainRules<ConstantGeometry>(ConstantGeometry(p.lambda, p.a, p.delta_value()));
}

inline OptionSet backward_options(double x, const ConstructorParams& p) {
  const auto rules = constant_rules(p);
  require(rules.in_upper(0, x), "backward_options: x is not in I");
  const OptionSet o = rules.backward_options(0, x);
  if (o.empty()) throw Error(ErrorKind::Internal, "backward_options: empty option set at x = " + std::to_string(x));
  return o;
}

inline OptionSet forward_options(double x, const ConstructorParams& p) {
  const auto rules = constant_rules(p);
  require(rules.in_lower(0, x), "forward_options: x is not in I_hat");
  const OptionSet o = rules.forward_options(0, x);
  if (o.empty()) throw Error(ErrorKind::Internal, "forward_options: empty option set at x = " + std::to_string(x));
  return o;
}

struct TransitResult {
  std::int64_t k = 0;
  double x_out = 0.0;
};

/// Iterates F_{-a} (lambda sites) from x in I until the orbit lands in I_hat.
inline TransitResult transit(double x, const ConstructorParams& p, std::int64_t max_steps = 10'000'000) {
  const auto rules = constant_rules(p);
  require(rules.in_upper(0, x), "transit: x is not in I");
  const auto& g = rules.geometry();
  TransitResult r{0, x};
  while (!rules.in_lower(0, r.x_out)) {
    if (r.k >= max_steps) throw Error(ErrorKind::NumericFailure, "transit: step limit reached");
    r.x_out = rules.forward(0, r.x_out, Choice::Lambda);
    ++r.k;
    if (r.x_out < g.lower(0).lo - kMembershipSlack)
      throw Error(ErrorKind::ParametersInadmissible,
                  "transit overshoots I_hat (x = " + std::to_string(r.x_out) + " below x_rep)");
  }
  return r;
}

inline double default_x0(const ConstructorParams& p) { return p.x0.value_or(1.0 + p.delta_value()); }

/// Builds a certificate window [-n_back, n_fwd] at E = 2 + lambda - a.
inline GroundStateCertificate construct(const ConstructorParams& p) {
  validate_params(p);
  const auto rules = constant_rules(p);
  auto c = build_chain(rules, default_x0(p), p.n_back, p.n_fwd, p.policy, p.free_bits, p.seed);
  c.a = p.a;
  c.delta = p.delta_value();
  c.e_top = 2.0;
  return c;
}

// ---------------------------------------------------------------------------
// Verification against independent oracles

struct VerifyTolerances {
  double tol_res = 1e-10;
  double tol_eig = 1e-6;
  double rho_min = 1e-3;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  double top_eigenvalue = 0.0;
  bool passed() const {
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
  }
  const CheckResult* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

/// Five independent checks of a certificate. The eigenfunction is taken as stored;
/// nothing from the construction trace is reused.
inline VerifyReport verify_certificate(const GroundStateCertificate& c, const VerifyTolerances& tol = {}) {
  require(c.word.size() == static_cast<std::size_t>(c.n_back + c.n_fwd + 1), "certificate: word length mismatch");
  require(c.background.size() == c.word.size(), "certificate: background length mismatch");
  require(c.u.size() == c.word.size() + 2, "certificate: eigenfunction length mismatch");
  VerifyReport rep;
  const RealizationWindow w = c.realization();

  // (i) recurrence
  {
    const auto res = recurrence_residuals(c.energy, w, c.u);
    std::size_t worst = 0;
    for (std::size_t i = 1; i < res.size(); ++i)
      if (res[i] > res[worst]) worst = i;
    const double r = res.empty() ? 0.0 : res[worst];
    rep.checks.push_back({"residual", r <= tol.tol_res, r, tol.tol_res,
                          "worst site " + std::to_string(w.n_min() + static_cast<std::int64_t>(worst))});
  }
  // (ii) positivity
  {
    std::size_t bad = 0;
    double mn = std::numeric_limits<double>::infinity();
    std::int64_t first_bad = 0;
    for (std::size_t k = 0; k < c.u.size(); ++k) {
      mn = std::min(mn, c.u[k]);
      if (!(c.u[k] > 0.0)) {
        if (bad == 0) first_bad = static_cast<std::int64_t>(k) - c.n_back - 1;
        ++bad;
      }
    }
    rep.checks.push_back({"positivity", bad == 0, mn, 0.0,
                          bad == 0 ? "all entries positive"
                                   : std::to_string(bad) + " non-positive entries, first at site " +
                                         std::to_string(first_bad)});
  }
  // (iii) decay on both tails
  {
    GroundStateCertificate tmp;
    tmp.n_back = c.n_back;
    tmp.n_fwd = c.n_fwd;
    tmp.log_u.resize(c.u.size());
    for (std::size_t k = 0; k < c.u.size(); ++k) tmp.log_u[k] = c.u[k] > 0.0 ? std::log(c.u[k]) : -745.0;
    const auto [b, f] = fitted_decay_rates(tmp);
    const double r = std::min(b, f);
    rep.checks.push_back({"decay", r >= tol.rho_min, r, tol.rho_min,
                          "back " + std::to_string(b) + ", forward " + std::to_string(f)});
  }
  // (iv), (v) dense tridiagonal oracle on the Dirichlet truncation
  {
    const auto spec = truncated_spectrum(assemble_truncation(w));
    const double top = spec.eigenvalues.back();
    rep.top_eigenvalue = top;
    const double gap = std::abs(top - c.energy);
    rep.checks.push_back({"top_eigenvalue", gap <= tol.tol_eig, gap, tol.tol_eig,
                          "top eigenvalue " + std::to_string(top)});
    const auto above = std::count_if(spec.eigenvalues.begin(), spec.eigenvalues.end(),
                                     [&](double e) { return e > c.energy + tol.tol_eig; });
    rep.checks.push_back({"top_of_spectrum", above == 0, static_cast<double>(above), 0.0,
                          std::to_string(above) + " eigenvalues above E + tol"});
  }
  return rep;
}

struct SweepRow {
  double a = 0.0;
  double energy = 0.0;
  bool constructed = false;
  bool verified = false;
  double residual = 0.0, decay_back = 0.0, decay_fwd = 0.0, eig_gap = 0.0;
  // quasi-periodic runs only: max invariance residual of the two sections and their gap
  std::optional<double> section_residual, section_gap;
  std::string error;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  std::size_t verified() const {
    return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const SweepRow& r) { return r.verified; }));
  }
  /// Smallest and largest verified a.
  std::optional<std::pair<double, double>> verified_a_range() const {
    std::optional<std::pair<double, double>> r;
    for (const auto& row : rows) {
      if (!row.verified) continue;
      if (!r) r = std::pair{row.a, row.a};
      r->first = std::min(r->first, row.a);
      r->second = std::max(r->second, row.a);
    }
    return r;
  }
};

inline SweepRow sweep_row_from(double a, const GroundStateCertificate& c, const VerifyReport& v) {
  SweepRow row;
  row.a = a;
  row.energy = c.energy;
  row.constructed = true;
  row.verified = v.passed();
  row.residual = c.residual;
  row.decay_back = c.decay_rate_back;
  row.decay_fwd = c.decay_rate_fwd;
  if (const auto* ch = v.find("top_eigenvalue")) row.eig_gap = ch->value;
  if (!row.verified) {
    for (const auto& ch : v.checks)
      if (!ch.passed) row.error += (row.error.empty() ? "" : "; ") + ch.name + " failed (" + ch.detail + ")";
  }
  return row;
}

/// One construct + verify per grid value of a; failures are recorded per row.
inline SweepReport sweep_interval(double lambda, std::span<const double> a_grid, const ConstructorParams& base,
                                  const VerifyTolerances& tol = {}, unsigned threads = 1) {
  SweepReport rep;
  rep.rows.resize(a_grid.size());
  parallel_for(a_grid.size(), threads, [&](std::size_t i) {
    ConstructorParams p = base;
    p.lambda = lambda;
    p.a = a_grid[i];
    SweepRow& row = rep.rows[i];
    row.a = p.a;
    row.energy = 2.0 + lambda - p.a;
    try {
      const auto c = construct(p);
      row = sweep_row_from(p.a, c, verify_certificate(c, tol));
    } catch (const Error& e) {
      row.error = e.what();
    }
  });
  return rep;
}

}  // namespace schro
