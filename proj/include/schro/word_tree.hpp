#pragma once

// Tree of admissible forward choice sequences of the ground-state constructor,
// its growth rate, and the 1/(N+1) Hausdorff-dimension lower bound.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "schro/constructor.hpp"
#include "schro/errors.hpp"
#include "schro/parallel.hpp"

namespace schro {

/// One admissible word. Bit i of `word` is the choice at forward depth i + 1
/// (1 = lambda site); bit i of `free_mask` marks a free step there.
struct Branch {
  std::uint64_t word = 0;
  std::uint64_t free_mask = 0;
  double x = 0.0;             // ratio after the last step
  std::uint32_t run = 0;      // forced steps since the last free step
  std::uint32_t max_run = 0;  // longest g-word of the vertices on this branch
};

/// Depth counts forward sites after the root. The root word g(empty) is the forced
/// prefix: the transit plus the forced forward steps before the first free choice.
/// A fixed prefix does not change Hausdorff dimension, so it is kept out of the
/// run statistics. Leaves are in lexicographic order of their words.
struct AdmissibleTree {
  double x_root = 0.0;
  std::int64_t prefix_length = 0;
  std::int64_t transit_length = 0;
  double eta = 0.0;                       // trim of the forward region at x_rep
  std::vector<std::uint8_t> prefix_word;  // 1 = lambda site
  int depth = 0;
  std::size_t cap = 0;
  bool truncated = false;
  int truncated_at = -1;               // first depth at which branches were dropped
  std::vector<std::size_t> counts;     // counts[d] = branches at depth d, counts[0] = 1
  std::vector<int> n_observed_by_depth;
  int N_observed = 0;                  // longest g-word over vertices up to `depth`
  bool unbounded_run = false;          // a g-word reached kMaxForcedPrefix
  std::vector<Branch> leaves;
};

inline constexpr std::size_t kDefaultTreeCap = 1'000'000;
inline constexpr int kMaxTreeDepth = 64;

inline constexpr std::int64_t kMaxForcedPrefix = 100'000;

/// Length of the forced run that starts at state x before site `site`, i.e. the
/// word g(a) of the vertex a whose last free step produced x. The run is forced,
/// so it is followed to its end even past the tree depth. Returns kMaxForcedPrefix
/// if the run does not end within that many steps.
template <class Geometry>
std::int64_t forced_run_length(const ChainRules<Geometry>& rules, double x, std::int64_t site) {
  std::int64_t len = 0;
  for (; len < kMaxForcedPrefix; ++len, ++site) {
    const OptionSet o = rules.forward_options(site - 1, x);
    if (o.empty())
      throw Error(ErrorKind::Internal, "no forward option at site " + std::to_string(site) + " (covering guarantee violated)");
    if (o.count() == 2) return len;
    x = o.image(o.zero ? Choice::Zero : Choice::Lambda);
  }
  return len;  // at least this long; the caller flags it
}

/// Breadth-first enumeration from x_root, which must lie in the lower region at
/// site `first_site - 1`. Children of a branch are ordered Zero before Lambda, so
/// every level stays in word order. Beyond `cap` branches the level is cut to its
/// first `cap` words and the tree is flagged.
template <class Geometry>
AdmissibleTree build_tree_from(const ChainRules<Geometry>& rules, double x_root, std::int64_t first_site, int depth,
                               std::size_t cap = kDefaultTreeCap, unsigned threads = 1) {
  require(depth >= 1 && depth <= kMaxTreeDepth, "depth must be in [1, 64]");
  require(cap >= 1, "cap must be >= 1");
  if (!rules.in_lower(first_site - 1, x_root))
    throw Error(ErrorKind::InvalidInput, "tree root x = " + std::to_string(x_root) + " is not in the lower region");

  AdmissibleTree t;
  t.x_root = x_root;
  t.depth = depth;
  t.cap = cap;
  t.counts.push_back(1);
  t.n_observed_by_depth.push_back(0);

  std::vector<Branch> level{Branch{0, 0, x_root, 0, 0}};
  for (int d = 1; d <= depth; ++d) {
    const std::int64_t site = first_site + d - 1;
    const std::uint64_t bit = std::uint64_t{1} << (d - 1);
    // two child slots per parent keep the ordering independent of the thread count
    std::vector<Branch> slots(2 * level.size());
    std::vector<std::uint8_t> used(2 * level.size(), 0);
    parallel_for(level.size(), threads, [&](std::size_t i) {
      const Branch& b = level[i];
      const OptionSet o = rules.forward_options(site - 1, b.x);
      if (o.empty())
        throw Error(ErrorKind::Internal, "no forward option at site " + std::to_string(site) + ", x = " +
                                             std::to_string(b.x) + " (covering guarantee violated)");
      const bool free = o.count() == 2;
      for (Choice c : {Choice::Zero, Choice::Lambda}) {
        if (!o.has(c)) continue;
        Branch child = b;
        child.x = o.image(c);
        if (c == Choice::Lambda) child.word |= bit;
        if (free) {
          child.free_mask |= bit;
          child.run = 0;
          const auto g = forced_run_length(rules, child.x, site + 1);
          child.max_run = std::max<std::uint32_t>(b.max_run, static_cast<std::uint32_t>(g));
        } else {
          child.run = b.run + 1;
          // only the root run lacks a precomputed g-word; count it as seen so far
          child.max_run = std::max(child.max_run, child.run);
        }
        const std::size_t k = 2 * i + (c == Choice::Lambda ? 1 : 0);
        slots[k] = child;
        used[k] = 1;
      }
    });
    std::vector<Branch> next;
    next.reserve(std::min(slots.size(), cap));
    for (std::size_t k = 0; k < slots.size(); ++k) {
      if (!used[k]) continue;
      if (next.size() == cap) {
        if (!t.truncated) {
          t.truncated = true;
          t.truncated_at = d;
        }
        break;
      }
      next.push_back(slots[k]);
    }
    level = std::move(next);
    for (const auto& b : level)
      if (b.max_run >= kMaxForcedPrefix) t.unbounded_run = true;
    int n_obs = t.n_observed_by_depth.back();
    for (const auto& b : level) n_obs = std::max(n_obs, static_cast<int>(b.max_run));
    t.counts.push_back(level.size());
    t.n_observed_by_depth.push_back(n_obs);
  }
  t.N_observed = t.n_observed_by_depth.back();
  t.leaves = std::move(level);
  return t;
}

/// Constant geometry with the forward region trimmed to [x_rep + eta, 1 - delta].
/// Near x_rep the zero map is forced for about log(1/dist) steps, so without the
/// trim the forced runs, and hence N, are unbounded.
class TrimmedGeometry {
 public:
  TrimmedGeometry(const ConstantGeometry& g, double eta) : g_(g), eta_(eta) {}
  double energy() const { return g_.energy(); }
  double lambda() const { return g_.lambda(); }
  double background(std::int64_t n) const { return g_.background(n); }
  Interval upper(std::int64_t n) const { return g_.upper(n); }
  Interval lower(std::int64_t n) const {
    Interval iv = g_.lower(n);
    iv.lo += eta_;
    return iv;
  }

 private:
  ConstantGeometry g_;
  double eta_;
};

struct TreeParams {
  int depth = 20;
  std::size_t cap = kDefaultTreeCap;
  std::optional<double> eta;  // trim of the forward region at x_rep; default delta
  unsigned threads = 1;
};

inline ChainRules<TrimmedGeometry> tree_rules(const ConstructorParams& p, double eta) {
  return ChainRules<TrimmedGeometry>(TrimmedGeometry(ConstantGeometry(p.lambda, p.a, p.delta_value()), eta));
}

/// Tree of forward words of the constant-background constructor from x0
/// (default 1 + delta), restricted to the trimmed forward region. Its words are a
/// subset of the constructor's, so the dimension bound carries over. The root sits
/// at the first free step; if none occurs within kMaxForcedPrefix steps the root
/// is the end of the transit.
inline AdmissibleTree build_tree(const ConstructorParams& p, const TreeParams& tp = {}) {
  validate_params(p);
  const double eta = tp.eta.value_or(p.delta_value());
  const TrappingIntervals ti = trapping_intervals(p.lambda, p.a, p.delta_value());
  require(eta >= 0.0 && eta < ti.Ihat_hi - ti.Ihat_lo, "eta must lie in [0, |I_hat|)");
  const TransitResult tr = transit(default_x0(p), p);
  const auto rules = tree_rules(p, eta);
  if (!rules.in_lower(0, tr.x_out))
    throw Error(ErrorKind::ParametersInadmissible, "transit lands below the trimmed forward region; reduce eta");
  std::vector<std::uint8_t> prefix(static_cast<std::size_t>(tr.k), 1);
  double x = tr.x_out;
  std::int64_t site = tr.k + 1;  // next site to fill
  for (std::int64_t s = 0; s < kMaxForcedPrefix; ++s) {
    const OptionSet o = rules.forward_options(site - 1, x);
    if (o.empty())
      throw Error(ErrorKind::Internal, "no forward option at site " + std::to_string(site) + " (covering guarantee violated)");
    if (o.count() == 2) break;
    const Choice c = o.zero ? Choice::Zero : Choice::Lambda;
    prefix.push_back(static_cast<std::uint8_t>(c));
    x = o.image(c);
    ++site;
  }
  if (static_cast<std::int64_t>(prefix.size()) - tr.k >= kMaxForcedPrefix) {
    prefix.resize(static_cast<std::size_t>(tr.k));
    x = tr.x_out;
    site = tr.k + 1;
  }
  AdmissibleTree t = build_tree_from(rules, x, site, tp.depth, tp.cap, tp.threads);
  t.eta = eta;
  t.transit_length = tr.k;
  t.prefix_length = static_cast<std::int64_t>(prefix.size());
  t.prefix_word = std::move(prefix);
  return t;
}

inline AdmissibleTree build_tree(const ConstructorParams& p, int depth, std::size_t cap = kDefaultTreeCap) {
  TreeParams tp;
  tp.depth = depth;
  tp.cap = cap;
  return build_tree(p, tp);
}

/// Longest forced run over a uniform grid of states in the forward region.
template <class Geometry>
std::int64_t forced_run_grid_sup(const ChainRules<Geometry>& rules, std::size_t points) {
  const Interval iv = rules.geometry().lower(0);
  std::int64_t best = 0;
  for (std::size_t i = 0; i < points; ++i) {
    const double x = iv.lo + (iv.hi - iv.lo) * (static_cast<double>(i) + 0.5) / static_cast<double>(points);
    best = std::max(best, forced_run_length(rules, x, 1));
  }
  return best;
}

/// log2(branches(depth)) / depth.
inline double growth_rate(const AdmissibleTree& t) {
  require(t.depth >= 5, "growth_rate needs depth >= 5");
  return std::log2(static_cast<double>(t.counts.back())) / t.depth;
}

/// Least-squares slope of log2(branches(d)) over the last half of depths.
inline double growth_rate_fit(const AdmissibleTree& t) {
  require(t.depth >= 5, "growth_rate needs depth >= 5");
  std::vector<double> xs, ys;
  for (int d = t.depth / 2; d <= t.depth; ++d) {
    xs.push_back(d);
    ys.push_back(std::log2(static_cast<double>(t.counts[static_cast<std::size_t>(d)])));
  }
  return detail::ls_slope(xs, ys);
}

/// dim_H >= 1/(N+1) for the full binary shift with the 2^-k metric.
inline double dimension_lower_bound(int N) {
  require(N >= 0, "N must be >= 0");
  return 1.0 / (N + 1);
}

struct StabilityReport {
  int depth_shallow = 0, depth_deep = 0;
  int n_shallow = 0, n_deep = 0;
  bool deep_truncated = false;
  bool stable() const { return n_shallow == n_deep; }
};

/// Compares N_observed at the tree depth against a deeper enumeration.
inline StabilityReport n_observed_stability(const ConstructorParams& p, const TreeParams& tp, int deep_depth) {
  require(deep_depth > tp.depth, "deep_depth must exceed the tree depth");
  TreeParams deep = tp;
  deep.depth = deep_depth;
  const AdmissibleTree a = build_tree(p, tp), b = build_tree(p, deep);
  return {tp.depth, deep_depth, a.N_observed, b.N_observed, b.truncated};
}

struct HolderPair {
  std::size_t i = 0, j = 0;
  int k_word = 0;  // first differing depth, 0 if equal
  int k_free = 0;  // index of the first differing free choice, 0 if equal
  double d_word = 0.0, d_free = 0.0;
  double ratio = 0.0;  // d_free / d_word^(1/(N+1)); <= 1 is the Hoelder bound
};

struct HolderReport {
  int N = 0;
  std::size_t pairs = 0;
  std::size_t violations = 0;
  double worst_ratio = 0.0;
  HolderPair worst;
  bool passed() const { return violations == 0; }
};

/// Distances of a leaf pair under the 2^-k metric on words and on free-choice bits.
inline HolderPair holder_pair(const AdmissibleTree& t, std::size_t i, std::size_t j, int N) {
  HolderPair h{i, j};
  const Branch& a = t.leaves.at(i);
  const Branch& b = t.leaves.at(j);
  const std::uint64_t diff = a.word ^ b.word;
  if (diff == 0) return h;
  const int pos = std::countr_zero(diff);  // 0-based depth of the first difference
  h.k_word = pos + 1;
  // equal prefixes give equal states, so the first difference is a free step of both
  const std::uint64_t below = (std::uint64_t{1} << pos) - 1;
  h.k_free = std::popcount(a.free_mask & below) + 1;
  h.d_word = std::ldexp(1.0, -h.k_word);
  h.d_free = std::ldexp(1.0, -h.k_free);
  h.ratio = h.d_free / std::pow(h.d_word, 1.0 / (N + 1));
  return h;
}

/// Samples leaf pairs, half uniform and half at geometric offsets in word order so
/// that long shared prefixes are exercised.
inline HolderReport holder_check(const AdmissibleTree& t, std::size_t sample_pairs, std::uint64_t seed) {
  require(t.leaves.size() >= 2, "holder_check needs at least 2 branches");
  HolderReport r;
  r.N = t.N_observed;
  auto g = substream(seed, 0x686f6c64);
  const std::size_t n = t.leaves.size();
  const int max_log = static_cast<int>(std::floor(std::log2(static_cast<double>(n))));
  for (std::size_t s = 0; s < sample_pairs; ++s) {
    const auto i = static_cast<std::size_t>(uniform01(g) * static_cast<double>(n)) % n;
    std::size_t j;
    if (s % 2 == 0) {
      j = static_cast<std::size_t>(uniform01(g) * static_cast<double>(n)) % n;
    } else {
      const int e = static_cast<int>(uniform01(g) * (max_log + 1)) % (max_log + 1);
      const std::size_t off = std::size_t{1} << e;
      j = i + off < n ? i + off : (i >= off ? i - off : n - 1 - i);
    }
    const HolderPair h = holder_pair(t, i, j, r.N);
    ++r.pairs;
    if (h.ratio > 1.0 + 1e-12) ++r.violations;
    if (h.ratio > r.worst_ratio) {
      r.worst_ratio = h.ratio;
      r.worst = h;
    }
  }
  return r;
}

struct ReplayResult {
  bool valid = true;
  int failed_depth = 0;  // 0 if valid
  std::string detail;
};

/// Re-runs the forward recursion along a leaf word and checks that each step is an
/// admissible option with the recorded forced/free status and that every state
/// stays in the lower region.
template <class Geometry>
ReplayResult replay_from(const ChainRules<Geometry>& rules, const AdmissibleTree& t, std::int64_t first_site,
                         const Branch& b) {
  ReplayResult r;
  double x = t.x_root;
  for (int d = 1; d <= t.depth; ++d) {
    const std::int64_t site = first_site + d - 1;
    const std::uint64_t bit = std::uint64_t{1} << (d - 1);
    const Choice c = (b.word & bit) ? Choice::Lambda : Choice::Zero;
    const OptionSet o = rules.forward_options(site - 1, x);
    const bool free = (b.free_mask & bit) != 0;
    if (!o.has(c) || (o.count() == 2) != free) {
      r.valid = false;
      r.failed_depth = d;
      r.detail = std::string("choice ") + to_string(c) + " not admissible as recorded";
      return r;
    }
    x = rules.forward(site, x, c);
    if (!rules.in_lower(site, x)) {
      r.valid = false;
      r.failed_depth = d;
      r.detail = "state left the lower region";
      return r;
    }
  }
  if (x != b.x) {
    r.valid = false;
    r.failed_depth = t.depth;
    r.detail = "final state differs from the stored state";
  }
  return r;
}

/// Replays a leaf against the trimmed rules and against the constructor's own
/// rules, so every stored word is also an admissible constructor prefix.
inline ReplayResult replay(const ConstructorParams& p, const AdmissibleTree& t, const Branch& b) {
  ReplayResult r = replay_from(tree_rules(p, t.eta), t, t.prefix_length + 1, b);
  if (!r.valid) return r;
  const auto rules = constant_rules(p);
  double x = default_x0(p);
  std::int64_t site = 1;
  for (std::uint8_t w : t.prefix_word) {
    x = rules.forward(site, x, w ? Choice::Lambda : Choice::Zero);
    ++site;
  }
  if (!rules.in_lower(site - 1, x) || x != t.x_root) {
    r.valid = false;
    r.detail = "prefix does not reproduce the root state";
    return r;
  }
  for (int d = 1; d <= t.depth; ++d, ++site) {
    const Choice c = (b.word >> (d - 1)) & 1 ? Choice::Lambda : Choice::Zero;
    if (!rules.forward_options(site - 1, x).has(c)) {
      r.valid = false;
      r.failed_depth = d;
      r.detail = "word is not an admissible constructor step";
      return r;
    }
    x = rules.forward(site, x, c);
  }
  return r;
}

}  // namespace schro
