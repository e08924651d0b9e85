#pragma once

// JSON serialization of the library's reports and certificates (nlohmann::json,
// ordered keys so that output is byte-stable).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "schro/constructor.hpp"
#include "schro/errors.hpp"
#include "schro/halfline_weyl.hpp"
#include "schro/mc_spectrum.hpp"
#include "schro/operator_core.hpp"
#include "schro/projective.hpp"
#include "schro/quasiperiodic.hpp"
#include "schro/spectrum_set.hpp"
#include "schro/transfer_cocycle.hpp"
#include "schro/word_tree.hpp"

namespace schro {

using json = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "1.0";

// ---------------------------------------------------------------------------
// Basic types

inline json to_json(const SpectrumSet& s) {
  json j = json::array();
  for (const auto& iv : s.intervals()) j.push_back(json::array({iv.lo, iv.hi}));
  return j;
}

inline SpectrumSet spectrum_from_json(const json& j) {
  require(j.is_array(), "spectrum must be a list of [lo, hi] pairs");
  std::vector<Interval> iv;
  for (const auto& p : j) {
    require(p.is_array() && p.size() == 2, "spectrum entries must be [lo, hi] pairs");
    iv.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return SpectrumSet(std::move(iv));
}

/// {"n_min": k, "potential": [...]} or {"n_min": k, "background": [...], "word": [...]}.
inline json to_json(const RealizationWindow& w) {
  json j;
  j["n_min"] = w.n_min();
  j["background"] = w.background();
  j["word"] = w.word();
  return j;
}

inline RealizationWindow window_from_json(const json& j) {
  require(j.is_object() && j.contains("n_min"), "realization window needs n_min");
  const auto n_min = j.at("n_min").get<std::int64_t>();
  if (j.contains("potential")) return RealizationWindow::from_potential(n_min, j.at("potential").get<std::vector<double>>());
  require(j.contains("background") && j.contains("word"), "realization window needs potential or background + word");
  auto bg = j.at("background").get<std::vector<double>>();
  auto word = j.at("word").get<std::vector<double>>();
  require(bg.size() == word.size() && !bg.empty(), "background and word lengths differ");
  return RealizationWindow(n_min, std::move(bg), std::move(word));
}

inline json to_json(const Witness& w) {
  json j;
  j["K"] = w.K;
  j["N"] = w.N;
  j["positions"] = w.positions;
  j["min_norms"] = w.min_norms;
  json vecs = json::array();
  for (const auto& v : w.unit_vectors) vecs.push_back(json::array({v.x, v.y}));
  j["unit_vectors"] = vecs;
  return j;
}

inline json to_json(const WitnessParams& p) {
  return json{{"K", p.K}, {"N", p.N}, {"angle_grid", p.angle_grid}, {"min_count", p.min_count}, {"stride", p.stride}};
}

// ---------------------------------------------------------------------------
// Backgrounds

inline json to_json(const QPBackground& bg) {
  json j;
  j["kind"] = "quasiperiodic";
  j["c"] = bg.c;
  j["alpha"] = bg.alpha;
  j["theta0"] = bg.theta0;
  j["fourier_cos"] = bg.fourier_cos;
  j["fourier_sin"] = bg.fourier_sin;
  return j;
}

inline QPBackground qp_background_from_json(const json& j) {
  require(j.value("kind", "") == "quasiperiodic", "background kind must be quasiperiodic");
  QPBackground bg;
  bg.c = j.at("c").get<double>();
  bg.alpha = j.at("alpha").get<double>();
  bg.theta0 = j.at("theta0").get<double>();
  bg.fourier_cos = j.at("fourier_cos").get<std::vector<double>>();
  bg.fourier_sin = j.value("fourier_sin", std::vector<double>{});
  bg.validate();
  return bg;
}

// ---------------------------------------------------------------------------
// Certificates

/// Versioned certificate document. The realization is stored as a 0/1 word plus
/// lambda and a background descriptor; the background values are regenerated on load.
inline json certificate_to_json(const GroundStateCertificate& c, const std::optional<QPBackground>& bg = std::nullopt) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "ground_state_certificate";
  j["lambda"] = c.lambda;
  j["a"] = c.a;
  j["delta"] = c.delta;
  j["energy"] = c.energy;
  j["e_top"] = c.e_top;
  j["n_back"] = c.n_back;
  j["n_fwd"] = c.n_fwd;
  j["policy"] = c.policy;
  j["transit_steps"] = c.transit_steps;
  std::string bits(c.word.size(), '0');
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (c.word[i]) bits[i] = '1';
  j["word"] = bits;
  j["background"] = bg ? to_json(*bg) : json{{"kind", "zero"}};
  j["ratios"] = c.ratios;
  j["u"] = c.u;
  j["diagnostics"] = {{"residual", c.residual},
                      {"min_entry", c.min_entry},
                      {"decay_rate_back", c.decay_rate_back},
                      {"decay_rate_fwd", c.decay_rate_fwd}};
  return j;
}

struct LoadedCertificate {
  GroundStateCertificate certificate;
  std::optional<QPBackground> background;
};

inline LoadedCertificate certificate_from_json(const json& j) {
  require(j.is_object() && j.value("kind", "") == "ground_state_certificate", "not a ground-state certificate");
  require(j.value("schema_version", "") == kSchemaVersion,
          "unsupported certificate schema_version (expected " + std::string(kSchemaVersion) + ")");
  LoadedCertificate out;
  auto& c = out.certificate;
  c.lambda = j.at("lambda").get<double>();
  c.a = j.at("a").get<double>();
  c.delta = j.at("delta").get<double>();
  c.energy = j.at("energy").get<double>();
  c.e_top = j.at("e_top").get<double>();
  c.n_back = j.at("n_back").get<std::int64_t>();
  c.n_fwd = j.at("n_fwd").get<std::int64_t>();
  require(c.n_back >= 1 && c.n_fwd >= 1, "certificate window half-lengths must be >= 1");
  c.policy = j.value("policy", "max_margin");
  c.transit_steps = j.value("transit_steps", std::int64_t{0});
  const auto bits = j.at("word").get<std::string>();
  require(bits.size() == static_cast<std::size_t>(c.n_back + c.n_fwd + 1), "certificate word length mismatch");
  c.word.resize(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    require(bits[i] == '0' || bits[i] == '1', "certificate word must be a 0/1 string");
    c.word[i] = bits[i] == '1';
  }
  const json& bgj = j.at("background");
  const std::string kind = bgj.value("kind", "");
  if (kind == "zero") {
    c.background.assign(bits.size(), 0.0);
  } else if (kind == "quasiperiodic") {
    out.background = qp_background_from_json(bgj);
    c.background = qp_samples(*out.background, -c.n_back, c.n_fwd);
  } else {
    throw Error(ErrorKind::InvalidInput, "unknown background kind '" + kind + "'");
  }
  c.ratios = j.value("ratios", std::vector<double>{});
  c.u = j.at("u").get<std::vector<double>>();
  require(c.u.size() == bits.size() + 2, "certificate eigenfunction length mismatch");
  c.log_u.resize(c.u.size());
  for (std::size_t k = 0; k < c.u.size(); ++k) c.log_u[k] = c.u[k] > 0.0 ? std::log(c.u[k]) : -745.0;
  if (j.contains("diagnostics")) {
    const auto& d = j.at("diagnostics");
    c.residual = d.value("residual", 0.0);
    c.min_entry = d.value("min_entry", 0.0);
    c.decay_rate_back = d.value("decay_rate_back", 0.0);
    c.decay_rate_fwd = d.value("decay_rate_fwd", 0.0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports

inline json to_json(const VerifyReport& r) {
  json j;
  j["passed"] = r.passed();
  j["top_eigenvalue"] = r.top_eigenvalue;
  json checks = json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"threshold", c.threshold},
                      {"detail", c.detail}});
  j["checks"] = checks;
  return j;
}

inline json to_json(const SweepRow& r) {
  return json{{"a", r.a},
              {"energy", r.energy},
              {"constructed", r.constructed},
              {"verified", r.verified},
              {"residual", r.residual},
              {"decay_back", r.decay_back},
              {"decay_fwd", r.decay_fwd},
              {"eig_gap", r.eig_gap},
              {"section_residual", r.section_residual ? json(*r.section_residual) : json(nullptr)},
              {"section_gap", r.section_gap ? json(*r.section_gap) : json(nullptr)},
              {"error", r.error}};
}

inline json to_json(const SweepReport& r) {
  json j;
  j["total"] = r.rows.size();
  j["verified"] = r.verified();
  if (const auto range = r.verified_a_range())
    j["verified_a_range"] = json::array({range->first, range->second});
  else
    j["verified_a_range"] = nullptr;
  json rows = json::array();
  for (const auto& row : r.rows) rows.push_back(to_json(row));
  j["rows"] = rows;
  return j;
}

inline json to_json(const CoverMargins& m) {
  return json{{"left", m.left}, {"overlap", m.overlap}, {"right", m.right}, {"covers", m.covers()}};
}

inline json to_json(const CoveringReport& r) {
  return json{{"I", json::array({r.intervals.I_lo, r.intervals.I_hi})},
              {"I_hat", json::array({r.intervals.Ihat_lo, r.intervals.Ihat_hi})},
              {"backward", to_json(r.backward)},
              {"forward", to_json(r.forward)},
              {"backward_margin", r.backward_margin},
              {"forward_margin", r.forward_margin},
              {"holds", r.holds()}};
}

inline json to_json(const McEstimate& e) {
  json j;
  j["spectrum"] = to_json(e.sigma);
  std::size_t hit_points = 0;
  for (const auto& g : e.grid) hit_points += g.hits > 0;
  j["grid_points"] = e.grid.size();
  j["grid_points_with_witness"] = hit_points;
  return j;
}

inline json to_json(const MonotonicityReport& r) {
  json j;
  j["holds"] = r.holds();
  j["tolerance"] = r.tolerance;
  j["sigma1"] = to_json(r.sigma1);
  j["sigma2"] = to_json(r.sigma2);
  json v = json::array();
  for (const auto& x : r.violations) v.push_back(json::array({x.lo, x.hi}));
  j["violations"] = v;
  return j;
}

inline json to_json(const SectionPair& s, double lambda) {
  const double sq = std::sqrt(lambda);
  return json{{"energy", s.energy},
              {"grid", s.att.grid()},
              {"iterations_att", s.iterations_att},
              {"iterations_rep", s.iterations_rep},
              {"residual_att", s.residual_att},
              {"residual_rep", s.residual_rep},
              {"monotone_att", s.monotone_att},
              {"monotone_rep", s.monotone_rep},
              {"min_gap", s.min_gap},
              {"gap", s.gap},
              {"gap_over_sqrt_lambda", s.gap / sq},
              {"att_range", json::array({s.att.min(), s.att.max()})},
              {"rep_range", json::array({s.rep.min(), s.rep.max()})}};
}

inline json to_json(const TopEnergyEstimate& t) {
  return json{{"e_star", t.e_star},          {"e_half", t.e_half},
              {"extrapolated", t.extrapolated}, {"error_bar", t.error_bar},
              {"half_length", t.half_length}, {"phase_samples", t.phase_samples}};
}

inline json to_json(const CylinderCheck& c) {
  return json{{"tested", c.tested},
              {"empty_backward", c.empty_backward},
              {"empty_forward", c.empty_forward},
              {"min_width_U", c.min_width_U},
              {"min_width_U_hat", c.min_width_Uhat},
              {"holds", c.holds()}};
}

inline json to_json(const HolderReport& h) {
  return json{{"N", h.N},
              {"pairs", h.pairs},
              {"violations", h.violations},
              {"worst_ratio", h.worst_ratio},
              {"worst_pair", {{"k_word", h.worst.k_word}, {"k_free", h.worst.k_free}}},
              {"passed", h.passed()}};
}

inline json tree_summary(const AdmissibleTree& t) {
  return json{{"depth", t.depth},
              {"cap", t.cap},
              {"truncated", t.truncated},
              {"truncated_at", t.truncated_at},
              {"eta", t.eta},
              {"transit_length", t.transit_length},
              {"prefix_length", t.prefix_length},
              {"x_root", t.x_root},
              {"branch_counts", t.counts},
              {"n_observed_by_depth", t.n_observed_by_depth},
              {"N_observed", t.N_observed},
              {"unbounded_run", t.unbounded_run}};
}

inline json to_json(const ScanReport& r) {
  json pts = json::array();
  for (const auto& p : r.points) pts.push_back(json::array({p.z, p.m, p.slope}));
  return json{{"passed", r.passed()},
              {"top_eigenvalue", r.top_eigenvalue},
              {"nonnegative", r.nonnegative},
              {"nonincreasing", r.nonincreasing},
              {"points", pts}};
}

inline json to_json(const LimitReport& r) {
  return json{{"eps", r.eps},       {"m", r.m},
              {"monotone", r.monotone}, {"diverges", r.diverges},
              {"limit", r.limit},   {"last_value", r.last_value}};
}

inline json to_json(const PositivityReport& r) {
  json j{{"positive", r.positive}, {"sign_changes", r.sign_changes},
         {"min_ratio", r.min_ratio}, {"max_ratio", r.max_ratio}};
  j["first_sign_change"] = r.first_sign_change ? json(*r.first_sign_change) : json(nullptr);
  return j;
}

inline json to_json(const ConeCheckReport& r) {
  return json{{"E", r.E},
              {"M", r.M},
              {"n", r.n},
              {"samples", r.samples},
              {"left_cone", r.left_cone},
              {"under_expanded", r.under_expanded},
              {"required_factor", r.required_factor},
              {"min_expansion", r.min_expansion},
              {"passed", r.passed()}};
}

}  // namespace schro
