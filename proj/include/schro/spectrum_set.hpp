#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "schro/errors.hpp"

namespace schro {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x, double slack = 0.0) const { return x >= lo - slack && x <= hi + slack; }
  double length() const { return hi - lo; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Finite union of disjoint closed intervals, kept sorted.
///
/// Construction normalizes: intervals are sorted by left endpoint and any
/// overlapping or touching pair is merged, so r_i < l_{i+1} always holds.
class SpectrumSet {
 public:
  SpectrumSet() = default;
  explicit SpectrumSet(std::vector<Interval> intervals) : intervals_(normalize(std::move(intervals))) {}

  static std::vector<Interval> normalize(std::vector<Interval> in) {
    for (const auto& iv : in) {
      require(std::isfinite(iv.lo) && std::isfinite(iv.hi), "interval endpoints must be finite");
      require(iv.lo <= iv.hi, "interval with lo > hi");
    }
    std::sort(in.begin(), in.end(), [](const Interval& a, const Interval& b) {
      return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
    });
    std::vector<Interval> out;
    for (const auto& iv : in) {
      if (!out.empty() && iv.lo <= out.back().hi) {
        out.back().hi = std::max(out.back().hi, iv.hi);
      } else {
        out.push_back(iv);
      }
    }
    return out;
  }

  const std::vector<Interval>& intervals() const { return intervals_; }
  std::size_t size() const { return intervals_.size(); }
  bool empty() const { return intervals_.empty(); }

  bool contains(double x, double slack = 0.0) const {
    return std::any_of(intervals_.begin(), intervals_.end(),
                       [&](const Interval& iv) { return iv.contains(x, slack); });
  }

  /// Every interval of this set lies inside `other` dilated by `slack`.
  bool subset_of(const SpectrumSet& other, double slack = 0.0) const {
    const SpectrumSet fat = other.dilated(slack);
    return std::all_of(intervals_.begin(), intervals_.end(), [&](const Interval& iv) {
      return std::any_of(fat.intervals_.begin(), fat.intervals_.end(),
                         [&](const Interval& f) { return f.lo <= iv.lo && iv.hi <= f.hi; });
    });
  }

  SpectrumSet dilated(double r) const {
    std::vector<Interval> v;
    v.reserve(intervals_.size());
    for (const auto& iv : intervals_) v.push_back({iv.lo - r, iv.hi + r});
    return SpectrumSet(std::move(v));
  }

  double distance_to(double x) const {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& iv : intervals_) {
      if (iv.contains(x)) return 0.0;
      d = std::min(d, x < iv.lo ? iv.lo - x : x - iv.hi);
    }
    return d;
  }

  friend bool operator==(const SpectrumSet&, const SpectrumSet&) = default;

 private:
  std::vector<Interval> intervals_;
};

/// Hausdorff distance between two nonempty finite unions of closed intervals.
/// The sup over a set of its distance to the other set is attained at an endpoint
/// or at a point of a gap of the other set, so endpoints and gap midpoints suffice.
inline double hausdorff_distance(const SpectrumSet& a, const SpectrumSet& b) {
  require(!a.empty() && !b.empty(), "hausdorff_distance needs nonempty sets");
  auto one_sided = [](const SpectrumSet& x, const SpectrumSet& y) {
    std::vector<double> probes;
    for (const auto& iv : x.intervals()) {
      probes.push_back(iv.lo);
      probes.push_back(iv.hi);
    }
    const auto& yi = y.intervals();
    for (std::size_t k = 0; k + 1 < yi.size(); ++k) {
      const double mid = 0.5 * (yi[k].hi + yi[k + 1].lo);
      if (x.contains(mid)) probes.push_back(mid);
      for (const auto& iv : x.intervals()) {
        const double c = std::clamp(mid, iv.lo, iv.hi);
        probes.push_back(c);
      }
    }
    double d = 0.0;
    for (double p : probes) d = std::max(d, y.distance_to(p));
    return d;
  };
  return std::max(one_sided(a, b), one_sided(b, a));
}

}  // namespace schro
