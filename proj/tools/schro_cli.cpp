// schro: command-line front end.
//
// Exit codes: 0 success, 1 verification failure, 2 invalid input or inadmissible
// parameters, 3 numeric failure.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "schro.hpp"

namespace {

using schro::json;

enum ExitCode : int { kOk = 0, kVerificationFailed = 1, kInvalidInput = 2, kNumericFailure = 3 };

int exit_code_for(schro::ErrorKind k) {
  switch (k) {
    case schro::ErrorKind::InvalidInput:
    case schro::ErrorKind::ParametersInadmissible: return kInvalidInput;
    default: return kNumericFailure;
  }
}

std::string format_double(double x) {
  std::ostringstream s;
  s.precision(17);
  s << x;
  return s.str();
}

// Options shared by every subcommand.
struct Common {
  unsigned threads = 1;
  std::string out;
  std::uint64_t seed = 0;
  std::string format = "json";
  std::string config;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--threads", c.threads, "Worker threads (default from SCHRO_THREADS, else 1)")
      ->envname("SCHRO_THREADS")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--out", c.out, "Output path (default stdout)");
  sub->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  sub->add_option("--format", c.format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  sub->add_option("--config", c.config, "key=value file mirroring the flags; flags win");
}


/// Resolved configuration: every option of the subcommand with its effective value.
json resolved_config(const CLI::App* sub) {
  json cfg;
  cfg["command"] = sub->get_name();
  for (const CLI::Option* o : sub->get_options()) {
    const std::string name = o->get_single_name();
    if (name == "help" || name == "out" || name == "config") continue;
    if (o->count() > 0) {
      const auto& r = o->results();
      if (o->get_expected_min() == 0) {
        cfg[name] = true;
      } else if (r.size() == 1 || o->get_items_expected_max() <= 1) {
        cfg[name] = r.back();  // take-last: the value in effect
      } else {
        std::string joined;
        for (std::size_t i = 0; i < r.size(); ++i) joined += (i ? "," : "") + r[i];
        cfg[name] = joined;
      }
    } else if (o->get_expected_min() == 0) {
      cfg[name] = false;
    } else {
      cfg[name] = o->get_default_str();
    }
  }
  return cfg;
}

struct Output {
  json doc;
  std::optional<std::string> csv;
  int code = kOk;
};

json envelope(const CLI::App* sub) {
  json j;
  j["schema_version"] = schro::kSchemaVersion;
  j["command"] = sub->get_name();
  j["config"] = resolved_config(sub);
  return j;
}

void write_output(const Common& c, const Output& out) {
  std::string text;
  if (c.format == "csv") {
    if (!out.csv) throw schro::Error(schro::ErrorKind::InvalidInput, "this command has no CSV output");
    text = *out.csv;
  } else {
    text = out.doc.dump(2) + "\n";
  }
  if (c.out.empty()) {
    std::cout << text;
    std::cout.flush();
  } else {
    std::ofstream f(c.out, std::ios::binary);
    if (!f) throw schro::Error(schro::ErrorKind::InvalidInput, "cannot open output file " + c.out);
    f << text;
  }
}

json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw schro::Error(schro::ErrorKind::InvalidInput, "cannot read " + path);
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw schro::Error(schro::ErrorKind::InvalidInput, path + ": " + e.what());
  }
}

std::vector<std::uint8_t> parse_bits(const std::string& s) {
  std::vector<std::uint8_t> bits;
  for (char ch : s) {
    if (ch == '0' || ch == '1')
      bits.push_back(static_cast<std::uint8_t>(ch - '0'));
    else
      throw schro::Error(schro::ErrorKind::InvalidInput, "free bits must be a 0/1 string");
  }
  return bits;
}

std::vector<double> make_grid(double lo, double hi, std::size_t count, const std::string& spacing) {
  schro::require(count >= 1, "count must be >= 1");
  schro::require(lo > 0.0 && hi >= lo, "need 0 < min <= max");
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    g[i] = spacing == "log" ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo))) : lo + t * (hi - lo);
  }
  return g;
}

/// Reads `key = value` lines ('#' comments) into flag arguments for `sub`.
std::vector<std::string> config_args(const std::string& path, const CLI::App* sub) {
  std::ifstream f(path);
  if (!f) throw schro::Error(schro::ErrorKind::InvalidInput, "cannot read config file " + path);
  std::vector<std::string> args;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return std::string{};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  };
  while (std::getline(f, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw schro::Error(schro::ErrorKind::InvalidInput, path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key == "config" || key == "out")
      throw schro::Error(schro::ErrorKind::InvalidInput, path + ": key '" + key + "' is not allowed in a config file");
    const CLI::Option* o = nullptr;
    try {
      o = sub->get_option("--" + key);
    } catch (const CLI::OptionNotFound&) {
      throw schro::Error(schro::ErrorKind::InvalidInput, path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    if (o->get_expected_min() == 0) {
      if (value == "true" || value == "1") args.push_back("--" + key);
      else if (value != "false" && value != "0")
        throw schro::Error(schro::ErrorKind::InvalidInput, path + ": flag '" + key + "' needs true or false");
    } else {
      args.push_back("--" + key);
      args.push_back(value);
    }
  }
  return args;
}

// ---------------------------------------------------------------------------
// Shared option groups

struct McOpts {
  std::vector<double> weights;
  schro::McParams p;
};

void add_mc(CLI::App* sub, McOpts& m) {
  m.p.witness = schro::mc_default_witness();
  sub->add_option("--half-length", m.p.half_length, "Window half-length L")->capture_default_str();
  sub->add_option("--samples", m.p.samples, "Sampled windows")->capture_default_str();
  sub->add_option("--grid-step", m.p.grid_step, "Energy grid step")->capture_default_str();
  sub->add_option("--pad", m.p.pad, "Grid padding beyond [min-2, max+2]")->capture_default_str();
  sub->add_option("--K", m.p.witness.K, "Witness norm bound")->capture_default_str();
  sub->add_option("--N", m.p.witness.N, "Witness half-length")->capture_default_str();
  sub->add_option("--min-count", m.p.witness.min_count, "Witness positions required")->capture_default_str();
  sub->add_option("--angle-grid", m.p.witness.angle_grid, "Unit-vector grid size")->capture_default_str();
  sub->add_flag("--full-stats", m.p.full_stats, "Evaluate every sample at every grid point");
}

struct ConstructOpts {
  schro::ConstructorParams p;
  std::optional<double> delta, x0;
  std::optional<std::int64_t> len, n_back, n_fwd;
  std::string policy = "max_margin";
  std::string free_bits;
};

void add_construct(CLI::App* sub, ConstructOpts& c, bool with_a = true) {
  sub->add_option("--lambda", c.p.lambda, "Bernoulli value lambda")->capture_default_str();
  if (with_a) sub->add_option("--a", c.p.a, "Distance below the top of the spectrum")->capture_default_str();
  sub->add_option("--delta", c.delta, "Trapping-interval offset (default a)");
  sub->add_option("--len", c.len, "Window half-length: sets n-back and n-fwd (default 200)");
  sub->add_option("--n-back", c.n_back, "Sites on the negative side");
  sub->add_option("--n-fwd", c.n_fwd, "Sites on the positive side");
  sub->add_option("--x0", c.x0, "Seed ratio x_0 in I (default 1 + delta)");
  sub->add_option("--policy", c.policy, "Choice policy")
      ->check(CLI::IsMember({"max_margin", "prefer_zero", "prefer_lambda", "enumerate"}))
      ->capture_default_str();
  sub->add_option("--free-bits", c.free_bits, "Leading free choices for the enumerate policy (0/1 string)");
}

void resolve(ConstructOpts& c, const Common& common) {
  c.p.delta = c.delta;
  c.p.x0 = c.x0;
  const std::int64_t len = c.len.value_or(200);
  c.p.n_back = c.n_back.value_or(len);
  c.p.n_fwd = c.n_fwd.value_or(len);
  c.p.policy = schro::parse_policy(c.policy);
  c.p.free_bits = parse_bits(c.free_bits);
  c.p.seed = common.seed;
}

struct BgOpts {
  schro::QPBackground bg;
  std::optional<double> e_star;
  std::int64_t top_half_length = 1000;
  std::size_t top_phases = 32;
};

void add_background(CLI::App* sub, BgOpts& b) {
  sub->add_option("--c", b.bg.c, "Background coupling c")->capture_default_str();
  sub->add_option("--alpha", b.bg.alpha, "Frequency alpha (default golden mean)")
      ->default_str(format_double(b.bg.alpha));
  sub->add_option("--theta0", b.bg.theta0, "Phase theta_0")->capture_default_str();
  sub->add_option("--fourier-cos", b.bg.fourier_cos, "Cosine coefficients of f, k = 1, 2, ...")
      ->delimiter(',')
      ->capture_default_str();
  sub->add_option("--fourier-sin", b.bg.fourier_sin, "Sine coefficients of f")->delimiter(',');
  sub->add_option("--e-star", b.e_star, "Top of the background spectrum (default: estimated)");
  sub->add_option("--top-half-length", b.top_half_length, "Window for estimating E*")->capture_default_str();
  sub->add_option("--top-phases", b.top_phases, "Phases for estimating E*")->capture_default_str();
}

struct SectionOpts {
  schro::SectionParams sp;
};

void add_sections(CLI::App* sub, SectionOpts& s) {
  sub->add_option("--grid", s.sp.grid, "Section grid size")->capture_default_str();
  sub->add_option("--max-iter", s.sp.max_iter, "Graph-transform iteration cap")->capture_default_str();
  sub->add_option("--tol", s.sp.tol, "Graph-transform convergence tolerance")->capture_default_str();
}

/// E* from the flag or the finite-section estimate; the estimate is reported.
double resolve_e_star(const BgOpts& b, unsigned threads, json& report) {
  if (b.e_star) {
    report["e_star"] = *b.e_star;
    report["e_star_source"] = "flag";
    return *b.e_star;
  }
  const auto t = schro::top_energy(b.bg, b.top_half_length, b.top_phases, threads);
  report["e_star"] = t.e_star;
  report["e_star_source"] = "estimated";
  report["top_energy"] = schro::to_json(t);
  return t.e_star;
}

struct TolOpts {
  schro::VerifyTolerances tol;
};

void add_tolerances(CLI::App* sub, TolOpts& t) {
  sub->add_option("--tol-res", t.tol.tol_res, "Residual tolerance")->capture_default_str();
  sub->add_option("--tol-eig", t.tol.tol_eig, "Top-eigenvalue tolerance")->capture_default_str();
  sub->add_option("--rho-min", t.tol.rho_min, "Minimum decay rate")->capture_default_str();
}

std::string sweep_csv(const schro::SweepReport& r) {
  std::ostringstream s;
  s << "a,energy,constructed,verified,residual,decay_back,decay_fwd,eig_gap,section_residual,section_gap\n";
  for (const auto& row : r.rows) {
    s << format_double(row.a) << ',' << format_double(row.energy) << ',' << row.constructed << ',' << row.verified
      << ',' << format_double(row.residual) << ',' << format_double(row.decay_back) << ','
      << format_double(row.decay_fwd) << ',' << format_double(row.eig_gap) << ','
      << (row.section_residual ? format_double(*row.section_residual) : "") << ','
      << (row.section_gap ? format_double(*row.section_gap) : "") << '\n';
  }
  return s.str();
}

std::string certificate_csv(const schro::GroundStateCertificate& c) {
  std::ostringstream s;
  s << "n,V,u\n";
  for (std::int64_t n = -c.n_back; n <= c.n_fwd; ++n) {
    const auto i = static_cast<std::size_t>(n + c.n_back);
    s << n << ',' << format_double(c.background[i] + (c.word[i] ? c.lambda : 0.0)) << ','
      << format_double(c.u_at(n)) << '\n';
  }
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ground states and spectra of one-dimensional random Schroedinger operators"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  Common common;
  std::map<std::string, std::function<Output()>> handlers;

  // asspec ------------------------------------------------------------------
  std::vector<double> as_support;
  auto* asspec = app.add_subcommand("asspec", "Almost sure spectrum of an i.i.d. model from the support formula");
  asspec->add_option("--support", as_support, "Support points, comma separated")->delimiter(',')->required();
  add_common(asspec, common);
  handlers["asspec"] = [&] {
    const auto s = schro::anderson_almost_sure_spectrum(schro::SiteSupport(as_support));
    Output o;
    o.doc = envelope(asspec);
    o.doc["result"] = schro::to_json(s);
    std::ostringstream csv;
    csv << "lo,hi\n";
    for (const auto& iv : s.intervals()) csv << format_double(iv.lo) << ',' << format_double(iv.hi) << '\n';
    o.csv = csv.str();
    return o;
  };

  // mc-spectrum -------------------------------------------------------------
  std::vector<double> mc_support;
  McOpts mc;
  auto* mcs = app.add_subcommand("mc-spectrum", "Monte-Carlo almost sure spectrum from essential-spectrum witnesses");
  mcs->add_option("--support", mc_support, "Support points")->delimiter(',')->required();
  mcs->add_option("--weights", mc.weights, "Sampling weights (default uniform)")->delimiter(',');
  add_mc(mcs, mc);
  add_common(mcs, common);
  handlers["mc-spectrum"] = [&] {
    mc.p.seed = common.seed;
    mc.p.threads = common.threads;
    const schro::SiteLaw law{schro::SiteSupport(mc_support), mc.weights};
    schro::require(mc.weights.empty() || mc.weights.size() == mc_support.size(), "weights must match the support");
    const auto est = schro::mc_essential_spectrum(law, mc.p);
    const auto formula = schro::anderson_almost_sure_spectrum(law.support);
    Output o;
    o.doc = envelope(mcs);
    o.doc["result"] = schro::to_json(est);
    o.doc["result"]["formula"] = schro::to_json(formula);
    o.doc["result"]["hausdorff_to_formula"] = schro::hausdorff_distance(est.sigma, formula);
    std::ostringstream csv;
    csv << "E,evaluated,hits,first_hit\n";
    for (const auto& g : est.grid)
      csv << format_double(g.E) << ',' << g.evaluated << ',' << g.hits << ',' << g.first_hit << '\n';
    o.csv = csv.str();
    return o;
  };

  // support-check -----------------------------------------------------------
  std::vector<double> sc_s1, sc_s2;
  std::optional<double> sc_tol;
  McOpts sc;
  auto* scc = app.add_subcommand("support-check", "Monte-Carlo check that nested supports give nested spectra");
  scc->add_option("--support1", sc_s1, "Smaller support")->delimiter(',')->required();
  scc->add_option("--support2", sc_s2, "Larger support")->delimiter(',')->required();
  scc->add_option("--tolerance", sc_tol, "Containment tolerance (default grid step)");
  add_mc(scc, sc);
  add_common(scc, common);
  handlers["support-check"] = [&] {
    sc.p.seed = common.seed;
    sc.p.threads = common.threads;
    const auto rep = schro::support_monotonicity_check(schro::SiteLaw{schro::SiteSupport(sc_s1), {}},
                                                       schro::SiteLaw{schro::SiteSupport(sc_s2), {}}, sc.p, sc_tol);
    Output o;
    o.doc = envelope(scc);
    o.doc["result"] = schro::to_json(rep);
    o.code = rep.holds() ? kOk : kVerificationFailed;
    return o;
  };

  // construct ---------------------------------------------------------------
  ConstructOpts cons;
  auto* consc = app.add_subcommand("construct", "Build a ground-state certificate at E = 2 + lambda - a");
  add_construct(consc, cons);
  add_common(consc, common);
  handlers["construct"] = [&] {
    resolve(cons, common);
    const auto cover = schro::validate_params(cons.p);
    const auto cert = schro::construct(cons.p);
    Output o;
    o.doc = schro::certificate_to_json(cert);
    o.doc["config"] = resolved_config(consc);
    o.doc["covering"] = schro::to_json(cover);
    o.csv = certificate_csv(cert);
    return o;
  };

  // verify ------------------------------------------------------------------
  std::string cert_path;
  TolOpts vtol;
  auto* ver = app.add_subcommand("verify", "Verify a certificate against independent oracles");
  ver->add_option("--cert", cert_path, "Certificate JSON")->required();
  add_tolerances(ver, vtol);
  add_common(ver, common);
  handlers["verify"] = [&] {
    const auto loaded = schro::certificate_from_json(read_json_file(cert_path));
    const auto rep = schro::verify_certificate(loaded.certificate, vtol.tol);
    Output o;
    o.doc = envelope(ver);
    o.doc["result"] = schro::to_json(rep);
    o.code = rep.passed() ? kOk : kVerificationFailed;
    return o;
  };

  // sweep -------------------------------------------------------------------
  ConstructOpts sw;
  TolOpts swtol;
  double sw_amin = 1e-4, sw_amax = 5e-3;
  std::size_t sw_count = 20;
  std::string sw_spacing = "log";
  auto* swc = app.add_subcommand("sweep", "Construct and verify over a grid of a values");
  add_construct(swc, sw, false);
  swc->add_option("--a-min", sw_amin, "Smallest a")->capture_default_str();
  swc->add_option("--a-max", sw_amax, "Largest a")->capture_default_str();
  swc->add_option("--count", sw_count, "Grid points")->capture_default_str();
  swc->add_option("--spacing", sw_spacing, "Grid spacing")->check(CLI::IsMember({"log", "linear"}))->capture_default_str();
  add_tolerances(swc, swtol);
  add_common(swc, common);
  handlers["sweep"] = [&] {
    resolve(sw, common);
    const auto grid = make_grid(sw_amin, sw_amax, sw_count, sw_spacing);
    const auto rep = schro::sweep_interval(sw.p.lambda, grid, sw.p, swtol.tol, common.threads);
    Output o;
    o.doc = envelope(swc);
    o.doc["result"] = schro::to_json(rep);
    o.csv = sweep_csv(rep);
    o.code = rep.verified() == rep.rows.size() ? kOk : kVerificationFailed;
    return o;
  };

  // qp-sections -------------------------------------------------------------
  BgOpts qs_bg;
  SectionOpts qs_sec;
  double qs_lambda = 0.1, qs_a = 1e-3, qs_max_res = 1e-8;
  auto* qsc = app.add_subcommand("qp-sections", "Invariant sections of the quasi-periodic skew product");
  add_background(qsc, qs_bg);
  add_sections(qsc, qs_sec);
  qsc->add_option("--lambda", qs_lambda, "Bernoulli value lambda")->capture_default_str();
  qsc->add_option("--a", qs_a, "Energy E = E* + lambda - a")->capture_default_str();
  qsc->add_option("--max-residual", qs_max_res, "Invariance residual bound")->capture_default_str();
  add_common(qsc, common);
  handlers["qp-sections"] = [&] {
    Output o;
    o.doc = envelope(qsc);
    json res;
    const double e_star = resolve_e_star(qs_bg, common.threads, res);
    const double E = (e_star + qs_lambda) - qs_a;
    const auto s = schro::invariant_sections(qs_bg.bg, E, qs_sec.sp);
    res["sections"] = schro::to_json(s, qs_lambda);
    const double sq = std::sqrt(qs_lambda);
    const bool res_ok = std::max(s.residual_att, s.residual_rep) <= qs_max_res;
    const bool gap_ok = s.gap >= 0.1 * sq && s.gap <= 10.0 * sq;
    res["checks"] = {{"residual", res_ok}, {"gap_order_sqrt_lambda", gap_ok}};
    o.doc["result"] = res;
    std::ostringstream csv;
    csv << "theta,x_att,x_rep\n";
    for (std::size_t i = 0; i < s.att.grid(); ++i)
      csv << format_double(static_cast<double>(i) / static_cast<double>(s.att.grid())) << ','
          << format_double(s.att[i]) << ',' << format_double(s.rep[i]) << '\n';
    o.csv = csv.str();
    o.code = res_ok && gap_ok ? kOk : kVerificationFailed;
    return o;
  };

  // qp-construct ------------------------------------------------------------
  BgOpts qc_bg;
  SectionOpts qc_sec;
  ConstructOpts qc;
  std::size_t qc_cyl = 16;
  auto* qcc = app.add_subcommand("qp-construct", "Ground-state certificate over the quasi-periodic background");
  add_background(qcc, qc_bg);
  add_sections(qcc, qc_sec);
  add_construct(qcc, qc);
  qcc->add_option("--cylinder-samples", qc_cyl, "Points per phase in the cylinder option check")->capture_default_str();
  add_common(qcc, common);
  handlers["qp-construct"] = [&] {
    resolve(qc, common);
    json extra;
    const double e_star = resolve_e_star(qc_bg, common.threads, extra);
    schro::QPParams p;
    p.lambda = qc.p.lambda;
    p.a = qc.p.a;
    p.delta = qc.delta;
    p.n_back = qc.p.n_back;
    p.n_fwd = qc.p.n_fwd;
    p.x0 = qc.x0;
    p.policy = qc.p.policy;
    p.free_bits = qc.p.free_bits;
    p.seed = qc.p.seed;
    p.sections = qc_sec.sp;
    p.cylinder_samples = qc_cyl;
    const auto r = schro::qp_construct(qc_bg.bg, e_star, p);
    Output o;
    o.doc = schro::certificate_to_json(r.certificate, qc_bg.bg);
    o.doc["config"] = resolved_config(qcc);
    extra["sections"] = schro::to_json(r.sections, p.lambda);
    extra["cylinders"] = schro::to_json(r.cylinders);
    o.doc["construction"] = extra;
    o.csv = certificate_csv(r.certificate);
    return o;
  };

  // qp-sweep ----------------------------------------------------------------
  BgOpts qw_bg;
  SectionOpts qw_sec;
  ConstructOpts qw;
  TolOpts qwtol;
  double qw_amin = 3e-4, qw_amax = 5e-3, qw_max_res = 1e-8;
  std::size_t qw_count = 20, qw_cyl = 16;
  std::string qw_spacing = "log";
  auto* qwc = app.add_subcommand("qp-sweep", "Quasi-periodic construct and verify over a grid of a values");
  add_background(qwc, qw_bg);
  add_sections(qwc, qw_sec);
  add_construct(qwc, qw, false);
  qwc->add_option("--a-min", qw_amin, "Smallest a")->capture_default_str();
  qwc->add_option("--a-max", qw_amax, "Largest a")->capture_default_str();
  qwc->add_option("--count", qw_count, "Grid points")->capture_default_str();
  qwc->add_option("--spacing", qw_spacing, "Grid spacing")->check(CLI::IsMember({"log", "linear"}))->capture_default_str();
  qwc->add_option("--cylinder-samples", qw_cyl, "Points per phase in the cylinder option check")->capture_default_str();
  qwc->add_option("--max-residual", qw_max_res, "Invariance residual bound")->capture_default_str();
  add_tolerances(qwc, qwtol);
  add_common(qwc, common);
  handlers["qp-sweep"] = [&] {
    resolve(qw, common);
    json res;
    const double e_star = resolve_e_star(qw_bg, common.threads, res);
    schro::QPParams p;
    p.lambda = qw.p.lambda;
    p.delta = qw.delta;
    p.n_back = qw.p.n_back;
    p.n_fwd = qw.p.n_fwd;
    p.x0 = qw.x0;
    p.policy = qw.p.policy;
    p.free_bits = qw.p.free_bits;
    p.seed = qw.p.seed;
    p.sections = qw_sec.sp;
    p.cylinder_samples = qw_cyl;
    const auto grid = make_grid(qw_amin, qw_amax, qw_count, qw_spacing);
    const auto rep = schro::qp_sweep_interval(qw_bg.bg, e_star, grid, p, qwtol.tol, common.threads);
    const double sq = std::sqrt(p.lambda);
    bool sections_ok = true;
    for (const auto& row : rep.rows) {
      if (!row.section_residual) continue;
      sections_ok = sections_ok && *row.section_residual <= qw_max_res && *row.section_gap >= 0.1 * sq &&
                    *row.section_gap <= 10.0 * sq;
    }
    res["sweep"] = schro::to_json(rep);
    res["energy_interval"] = json::array({e_star + p.lambda - qw_amax, e_star + p.lambda - qw_amin});
    res["sections_ok"] = sections_ok;
    Output o;
    o.doc = envelope(qwc);
    o.doc["result"] = res;
    o.csv = sweep_csv(rep);
    o.code = rep.verified() == rep.rows.size() && sections_ok ? kOk : kVerificationFailed;
    return o;
  };

  // dimension ---------------------------------------------------------------
  ConstructOpts dm;
  schro::TreeParams tp;
  std::size_t dm_pairs = 1000;
  int dm_deep = 40;
  auto* dmc = app.add_subcommand("dimension", "Word tree growth and the 1/(N+1) dimension bound");
  add_construct(dmc, dm);
  dmc->add_option("--depth", tp.depth, "Tree depth")->capture_default_str();
  dmc->add_option("--cap", tp.cap, "Branch cap")->capture_default_str();
  dmc->add_option("--eta", tp.eta, "Trim of the forward region at x_rep (default delta)");
  dmc->add_option("--pairs", dm_pairs, "Hoelder-check pairs")->capture_default_str();
  dmc->add_option("--deep-depth", dm_deep, "Depth of the stability comparison")->capture_default_str();
  add_common(dmc, common);
  handlers["dimension"] = [&] {
    resolve(dm, common);
    tp.threads = common.threads;
    const auto t = schro::build_tree(dm.p, tp);
    const auto holder = schro::holder_check(t, dm_pairs, common.seed);
    const auto stab = schro::n_observed_stability(dm.p, tp, dm_deep);
    std::size_t replay_failures = 0;
    for (const auto& b : t.leaves) replay_failures += !schro::replay(dm.p, t, b).valid;
    const double g = schro::growth_rate(t);
    const double bound = schro::dimension_lower_bound(t.N_observed);
    json res;
    res["tree"] = schro::tree_summary(t);
    res["growth_rate"] = g;
    res["growth_rate_fit"] = schro::growth_rate_fit(t);
    res["dimension_lower_bound"] = bound;
    res["holder"] = schro::to_json(holder);
    res["stability"] = {{"depth", stab.depth_shallow},
                        {"deep_depth", stab.depth_deep},
                        {"N_observed", stab.n_shallow},
                        {"N_observed_deep", stab.n_deep},
                        {"deep_truncated", stab.deep_truncated},
                        {"stable", stab.stable()}};
    res["replay_failures"] = replay_failures;
    Output o;
    o.doc = envelope(dmc);
    o.doc["result"] = res;
    std::ostringstream csv;
    csv << "depth,branch_count\n";
    for (std::size_t d = 0; d < t.counts.size(); ++d) csv << d << ',' << t.counts[d] << '\n';
    o.csv = csv.str();
    const bool ok = g > 0.0 && !t.unbounded_run && holder.passed() && stab.stable() && replay_failures == 0;
    o.code = ok ? kOk : kVerificationFailed;
    return o;
  };

  // nondecay ----------------------------------------------------------------
  double nd_lambda = 0.5, nd_x0_min = 1e-2, nd_x0_max = 1e2;
  std::size_t nd_count = 100;
  std::int64_t nd_horizon = 500;
  auto* ndc = app.add_subcommand("nondecay", "Orbit classification at E = 2 + lambda for random realizations");
  ndc->add_option("--lambda", nd_lambda, "Bernoulli value lambda")->capture_default_str();
  ndc->add_option("--realizations", nd_count, "Random realizations")->capture_default_str();
  ndc->add_option("--horizon", nd_horizon, "Sites on each side")->capture_default_str();
  ndc->add_option("--x0-min", nd_x0_min, "Smallest random x0 (log-uniform)")->capture_default_str();
  ndc->add_option("--x0-max", nd_x0_max, "Largest random x0")->capture_default_str();
  add_common(ndc, common);
  handlers["nondecay"] = [&] {
    schro::require(nd_x0_min > 0.0 && nd_x0_max >= nd_x0_min, "need 0 < x0-min <= x0-max");
    std::map<std::string, std::size_t> tags;
    std::size_t positive = 0, bounded = 0;
    json rows = json::array();
    for (std::size_t r = 0; r < nd_count; ++r) {
      auto g = schro::substream(common.seed, r);
      std::vector<double> omega(static_cast<std::size_t>(2 * nd_horizon + 1));
      for (double& w : omega) w = schro::uniform01(g) < 0.5 ? 0.0 : nd_lambda;
      const double x0 =
          std::exp(std::log(nd_x0_min) + schro::uniform01(g) * (std::log(nd_x0_max) - std::log(nd_x0_min)));
      const auto c = schro::classify_positive_orbit(nd_lambda, omega, x0, nd_horizon);
      ++tags[schro::to_string(c.tag)];
      const bool pos = c.tag != schro::OrbitCase::BelowRepContradiction;
      positive += pos;
      bounded += pos && schro::has_bounded_derivative(c.tag);
      rows.push_back({{"x0", x0}, {"tag", schro::to_string(c.tag)}, {"entry_index", c.entry_index}});
    }
    json res;
    res["tags"] = tags;
    res["positive_orbits"] = positive;
    res["bounded_on_one_side"] = bounded;
    res["two_sided_decay"] = positive - bounded;
    res["orbits"] = rows;
    Output o;
    o.doc = envelope(ndc);
    o.doc["result"] = res;
    o.code = positive == bounded ? kOk : kVerificationFailed;
    return o;
  };

  // mfunction ---------------------------------------------------------------
  std::string mf_model = "free";
  double mf_lambda = 1.0, mf_zmin = 0.0, mf_zmax = 0.0, mf_dual_tol = 1e-9;
  std::optional<double> mf_emax;
  std::vector<double> mf_z{3.0};
  std::int64_t mf_L = 2000;
  std::size_t mf_scan = 0;
  bool mf_limit = false;
  auto* mfc = app.add_subcommand("mfunction", "Half-line Weyl-Titchmarsh m-function");
  mfc->add_option("--model", mf_model, "Potential")->check(CLI::IsMember({"free", "bernoulli"}))->capture_default_str();
  mfc->add_option("--lambda", mf_lambda, "Bernoulli value lambda")->capture_default_str();
  mfc->add_option("--L", mf_L, "Half-line length")->capture_default_str();
  mfc->add_option("--z", mf_z, "Real energies to evaluate")->delimiter(',')->capture_default_str();
  mfc->add_option("--scan-count", mf_scan, "Scan grid points (0 = no scan)")->capture_default_str();
  mfc->add_option("--scan-min", mf_zmin, "Scan start (default top eigenvalue + 1e-3)");
  mfc->add_option("--scan-max", mf_zmax, "Scan end (default scan start + 2)");
  mfc->add_flag("--limit", mf_limit, "Limit of m(E_max + eps) as eps decreases");
  mfc->add_option("--e-max", mf_emax, "Top of the spectrum for the limit (default 2 or 2 + lambda)");
  mfc->add_option("--dual-tol", mf_dual_tol, "Agreement bound between evaluation paths")->capture_default_str();
  add_common(mfc, common);
  handlers["mfunction"] = [&] {
    std::vector<double> v(static_cast<std::size_t>(mf_L + 1), 0.0);
    if (mf_model == "bernoulli") {
      auto g = schro::substream(common.seed, 0);
      for (double& x : v) x = schro::uniform01(g) < 0.5 ? 0.0 : mf_lambda;
    }
    const schro::HalfLineWindow hl(0, v);
    bool ok = true;
    json res;
    json vals = json::array();
    for (double z : mf_z) {
      const double a = schro::m_function_solve<double>(hl, z), b = schro::m_function_cf<double>(hl, z),
                   c = schro::m_function_ratio<double>(hl, z);
      const double diff = std::max({std::abs(a - b), std::abs(a - c), std::abs(b - c)});
      json row{{"z", z}, {"m_solve", a}, {"m_cf", b}, {"m_ratio", c}, {"max_path_difference", diff}};
      if (mf_model == "free" && z > 2.0) row["m_free_exact"] = schro::free_m_function(z);
      ok = ok && diff <= mf_dual_tol;
      vals.push_back(row);
    }
    res["values"] = vals;
    std::optional<std::string> csv;
    if (mf_scan > 0) {
      const double top = schro::top_eigenvalue(hl.truncation());
      const double lo = mf_zmin > top ? mf_zmin : top + 1e-3;
      const double hi = mf_zmax > lo ? mf_zmax : lo + 2.0;
      std::vector<double> grid(mf_scan);
      for (std::size_t i = 0; i < mf_scan; ++i)
        grid[i] = mf_scan == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(mf_scan - 1);
      const auto scan = schro::negativity_monotonicity_scan(hl, grid);
      res["scan"] = schro::to_json(scan);
      ok = ok && scan.passed();
      std::ostringstream s;
      s << "z,m,slope\n";
      for (const auto& p : scan.points) s << format_double(p.z) << ',' << format_double(p.m) << ',' << format_double(p.slope) << '\n';
      csv = s.str();
    }
    if (mf_limit) {
      const double e_max = mf_emax.value_or(mf_model == "free" ? 2.0 : 2.0 + mf_lambda);
      const auto eps = schro::default_eps_sequence(hl, e_max);
      if (eps.size() >= 3) {
        res["limit"] = schro::to_json(schro::subordinate_limit(hl, e_max, eps));
        res["limit"]["resolved"] = true;
      } else {
        res["limit"] = {{"resolved", false},
                        {"e_max", e_max},
                        {"resolution_floor", schro::resolution_floor(hl, e_max)},
                        {"reason", "fewer than three eps values above the truncation resolution"}};
      }
    }
    Output o;
    o.doc = envelope(mfc);
    o.doc["result"] = res;
    o.csv = csv;
    o.code = ok ? kOk : kVerificationFailed;
    return o;
  };

  // ramp-demo ---------------------------------------------------------------
  std::int64_t rd_L1 = 50, rd_L2 = 200;
  double rd_lo = -1.0, rd_hi = 1.0, rd_E = 0.0, rd_M = 0.0;
  std::int64_t rd_nmin = 5, rd_nmax = 100;
  std::size_t rd_samples = 10000;
  auto* rdc = app.add_subcommand("ramp-demo", "V(n) = n: stable eigenvalue counts and cone invariance");
  rdc->add_option("--L1", rd_L1, "First window half-length")->capture_default_str();
  rdc->add_option("--L2", rd_L2, "Second window half-length")->capture_default_str();
  rdc->add_option("--interval-lo", rd_lo, "Counting interval start")->capture_default_str();
  rdc->add_option("--interval-hi", rd_hi, "Counting interval end")->capture_default_str();
  rdc->add_option("--E", rd_E, "Cone-check energy")->capture_default_str();
  rdc->add_option("--M", rd_M, "Perturbation bound")->capture_default_str();
  rdc->add_option("--n-min", rd_nmin, "First cone-check site")->capture_default_str();
  rdc->add_option("--n-max", rd_nmax, "Last cone-check site")->capture_default_str();
  rdc->add_option("--cone-samples", rd_samples, "Cone vectors per site")->capture_default_str();
  add_common(rdc, common);
  handlers["ramp-demo"] = [&] {
    auto ramp = [](std::int64_t L) {
      std::vector<double> v;
      for (std::int64_t n = -L; n <= L; ++n) v.push_back(static_cast<double>(n));
      return schro::RealizationWindow::from_potential(-L, std::move(v));
    };
    const schro::Interval iv{rd_lo, rd_hi};
    const auto c1 = schro::eigenvalue_count_in_interval(ramp(rd_L1), iv);
    const auto c2 = schro::eigenvalue_count_in_interval(ramp(rd_L2), iv);
    schro::require(rd_nmin <= rd_nmax, "need n-min <= n-max");
    std::size_t failed_sites = 0, total = 0;
    double min_exp_ratio = std::numeric_limits<double>::infinity();
    json sites = json::array();
    for (std::int64_t n = rd_nmin; n <= rd_nmax; ++n) {
      const auto rep = schro::cone_check(rd_E, rd_M, static_cast<double>(n), rd_samples,
                                         schro::mix64(common.seed) ^ static_cast<std::uint64_t>(n));
      total += rep.samples;
      failed_sites += !rep.passed();
      min_exp_ratio = std::min(min_exp_ratio, rep.min_expansion / rep.required_factor);
      sites.push_back(schro::to_json(rep));
    }
    json res;
    res["counts"] = {{"L1", rd_L1}, {"L2", rd_L2}, {"count_L1", c1}, {"count_L2", c2}, {"equal", c1 == c2}};
    res["cone"] = {{"sites", rd_nmax - rd_nmin + 1},
                   {"vectors", total},
                   {"failed_sites", failed_sites},
                   {"min_expansion_over_required", min_exp_ratio},
                   {"passed", failed_sites == 0},
                   {"per_site", sites}};
    Output o;
    o.doc = envelope(rdc);
    o.doc["result"] = res;
    o.code = c1 == c2 && failed_sites == 0 ? kOk : kVerificationFailed;
    return o;
  };

  // Config files become flags placed before the command-line flags, so the
  // command line wins under the take-last policy.
  std::vector<std::string> args;
  for (int i = argc - 1; i >= 1; --i) args.emplace_back(argv[i]);  // CLI11 expects reversed order
  try {
    std::string sub_name, cfg_path;
    for (int i = 1; i < argc; ++i) {
      const std::string a = argv[i];
      if (sub_name.empty() && handlers.count(a)) sub_name = a;
      if (a == "--config" && i + 1 < argc) cfg_path = argv[i + 1];
      if (a.rfind("--config=", 0) == 0) cfg_path = a.substr(9);
    }
    if (!cfg_path.empty() && !sub_name.empty()) {
      const auto extra = config_args(cfg_path, app.get_subcommand(sub_name));
      std::vector<std::string> fwd;
      bool inserted = false;
      for (int i = 1; i < argc; ++i) {
        fwd.emplace_back(argv[i]);
        if (!inserted && fwd.back() == sub_name) {
          fwd.insert(fwd.end(), extra.begin(), extra.end());
          inserted = true;
        }
      }
      args.assign(fwd.rbegin(), fwd.rend());
    }
  } catch (const schro::Error& e) {
    std::cerr << "schro: " << e.what() << "\n";
    return kInvalidInput;
  }

  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalidInput;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    const Output out = handlers.at(name)();
    write_output(common, out);
    if (out.code == kVerificationFailed) std::cerr << "schro " << name << ": verification failed\n";
    return out.code;
  } catch (const schro::Error& e) {
    std::cerr << "schro " << name << ": " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const json::exception& e) {
    std::cerr << "schro " << name << ": invalid-input: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const std::bad_alloc&) {
    std::cerr << "schro " << name << ": numeric-failure: out of memory\n";
    return kNumericFailure;
  }
}
