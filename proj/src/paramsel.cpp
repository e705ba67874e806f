#include "likecard/paramsel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "likecard/errors.hpp"
#include "likecard/probmodel.hpp"
#include "likecard/treeindex.hpp"

namespace likecard {

double storage_cost(std::uint32_t k, double f, double n_pos, double n_neg, double max_len, Parity parity) {
  if (!(f > 0.0 && f < 1.0)) throw std::invalid_argument("f must lie in (0, 1)");
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  const double ln2 = std::numbers::ln2;
  const double per_key = -std::log(f) / (ln2 * ln2);
  const double fk = std::pow(f, static_cast<double>(k));
  if (parity == Parity::Odd) {
    return per_key * (n_pos + n_neg * f) / (1.0 - f) * (1.0 - fk) + 8.0 * max_len * n_pos * fk;
  }
  const double fk1 = std::pow(f, static_cast<double>(k - 1));
  return per_key / (1.0 - f) * (n_pos * (1.0 - fk) + n_neg * f * (1.0 - fk1)) + 8.0 * max_len * n_neg * fk;
}

double storage_cost_for_layers(std::uint32_t m, double f, const BucketStats& stats) {
  if (m < 2) throw std::invalid_argument("layer count must be at least 2");
  return storage_cost(m / 2, f, static_cast<double>(stats.n_pos), static_cast<double>(stats.n_neg),
                      static_cast<double>(stats.max_len), m % 2 == 1 ? Parity::Odd : Parity::Even);
}

namespace {

struct Interval {
  double center;
  double half_width;
  double value;
};

// Indices of potentially optimal intervals: the lower-right convex hull of
// (half_width, value) starting at the best point, filtered by the usual
// epsilon condition.
std::vector<std::size_t> potentially_optimal(const std::vector<Interval>& intervals) {
  constexpr double kEpsilon = 1e-4;
  // Best interval per distinct width; ties go to the earlier index.
  std::vector<std::size_t> per_width;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    auto it = std::find_if(per_width.begin(), per_width.end(), [&](std::size_t j) {
      return intervals[j].half_width == intervals[i].half_width;
    });
    if (it == per_width.end()) {
      per_width.push_back(i);
    } else if (intervals[i].value < intervals[*it].value) {
      *it = i;
    }
  }
  std::sort(per_width.begin(), per_width.end(),
            [&](std::size_t a, std::size_t b) { return intervals[a].half_width < intervals[b].half_width; });

  double f_min = std::numeric_limits<double>::infinity();
  std::size_t start = 0;
  for (std::size_t p = 0; p < per_width.size(); ++p) {
    if (intervals[per_width[p]].value <= f_min) {
      f_min = intervals[per_width[p]].value;
      start = p;
    }
  }

  std::vector<std::size_t> hull;
  for (std::size_t p = start; p < per_width.size(); ++p) {
    const auto& c = intervals[per_width[p]];
    while (hull.size() >= 2) {
      const auto& a = intervals[hull[hull.size() - 2]];
      const auto& b = intervals[hull.back()];
      const double cross = (b.half_width - a.half_width) * (c.value - a.value) -
                           (b.value - a.value) * (c.half_width - a.half_width);
      if (cross <= 0.0) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(per_width[p]);
  }

  std::vector<std::size_t> chosen;
  for (std::size_t h = 0; h < hull.size(); ++h) {
    if (h + 1 == hull.size()) {
      chosen.push_back(hull[h]);
      break;
    }
    const auto& a = intervals[hull[h]];
    const auto& b = intervals[hull[h + 1]];
    const double slope = (b.value - a.value) / (b.half_width - a.half_width);
    if (a.value - slope * a.half_width <= f_min - kEpsilon * std::abs(f_min)) chosen.push_back(hull[h]);
  }
  return chosen;
}

}  // namespace

MinimizeResult direct_minimize(const std::function<double(double)>& fn, double lo, double hi, int budget) {
  if (!(hi > lo)) throw std::invalid_argument("empty search interval");
  std::vector<Interval> intervals;
  MinimizeResult best;
  auto evaluate = [&](double x) {
    const double v = fn(x);
    ++best.evaluations;
    if (best.evaluations == 1 || v < best.value) {
      best.value = v;
      best.x = x;
    }
    return v;
  };

  const double c0 = 0.5 * (lo + hi);
  intervals.push_back({c0, 0.5 * (hi - lo), evaluate(c0)});
  while (best.evaluations + 2 <= budget) {
    const auto chosen = potentially_optimal(intervals);
    bool progressed = false;
    for (std::size_t idx : chosen) {
      if (best.evaluations + 2 > budget) break;
      const Interval parent = intervals[idx];
      const double third = parent.half_width / 3.0;
      if (third <= 1e-14 * std::max(1.0, std::abs(parent.center))) continue;
      const double left = parent.center - 2.0 * third;
      const double right = parent.center + 2.0 * third;
      intervals[idx].half_width = third;
      intervals.push_back({left, third, evaluate(left)});
      intervals.push_back({right, third, evaluate(right)});
      progressed = true;
    }
    if (!progressed) break;
  }

  // Polish: bisection on the sign of the central-difference slope within the
  // best point's interval.
  double width = 0.5 * (hi - lo);
  for (const auto& iv : intervals) {
    if (iv.center == best.x) width = iv.half_width;
  }
  double a = std::max(lo, best.x - width);
  double b = std::min(hi, best.x + width);
  for (int iter = 0; iter < 60 && b - a > 1e-12 * std::max(1.0, std::abs(a)); ++iter) {
    const double mid = 0.5 * (a + b);
    const double h = std::max(1e-9, 1e-6 * (b - a));
    const double up = evaluate(std::min(hi, mid + h));
    const double down = evaluate(std::max(lo, mid - h));
    (up > down ? b : a) = mid;
  }
  evaluate(0.5 * (a + b));
  return best;
}

double filter_overhead_bits(std::uint32_t m) { return 8.0 * static_cast<double>(1 + 8 + 14 * (m - 1) + 4); }

std::vector<std::uint32_t> default_layer_candidates() {
  std::vector<std::uint32_t> out;
  for (std::uint32_t m = kMinLayers; m <= kMaxLayers; ++m) out.push_back(m);
  return out;
}

BucketPlan optimize_bucket(const BucketStats& stats, std::span<const std::uint32_t> m_candidates,
                           const std::function<FRange(std::uint32_t)>& range_for) {
  BucketPlan best;
  best.bucket_id = stats.bucket_id;
  best.stats = stats;
  if (stats.n_pos == 0) {
    // Nothing to accept: a single always-false Bloom layer.
    best.m = 2;
    best.f = kMaxFalsePositive;
    best.predicted_bits = 0.0;
    best.overhead_bits = filter_overhead_bits(2);
    return best;
  }
  bool found = false;
  for (std::uint32_t m : m_candidates) {
    const FRange range = range_for(m);
    if (!(range.hi > range.lo)) continue;
    auto cost = [&](double log_f) { return storage_cost_for_layers(m, std::exp(log_f), stats); };
    const auto result = direct_minimize(cost, std::log(range.lo), std::log(range.hi));
    if (!found || result.value + filter_overhead_bits(m) < best.total_bits()) {
      best.m = m;
      // exp(log(hi)) may round above hi; keep f inside the range it was searched in.
      best.f = std::clamp(std::exp(result.x), range.lo, range.hi);
      best.predicted_bits = result.value;
      best.overhead_bits = filter_overhead_bits(m);
      found = true;
    }
  }
  if (!found) {
    throw InfeasibleError("infeasible constraint: no layer count leaves a false-positive range above " +
                          std::to_string(kMinFalsePositive) + " for bucket " + std::to_string(stats.bucket_id));
  }
  return best;
}

BucketPlan optimize_bucket(const BucketStats& stats, std::span<const std::uint32_t> m_candidates, FRange range) {
  return optimize_bucket(stats, m_candidates, [range](std::uint32_t) { return range; });
}

double Plan::fallthrough_probability() const {
  double q = 1.0;
  for (const auto& b : buckets) {
    if (b.stats.n_pos > 0) q *= 1.0 - prob::p_bucket(b.f, b.m);
  }
  return q;
}

std::optional<double> Plan::walk_probability() const {
  if (threshold < 2) return std::nullopt;
  return prob::p_b1_prefix_walk(fallthrough_probability(), 2, threshold);
}

std::vector<BucketStats> bucket_stats(const BucketedKeys& keys, bool use_frontier) {
  const std::uint32_t n = keys.bucket_count();
  std::vector<BucketStats> stats;
  std::uint64_t above = 0;  // keys in buckets > i
  std::vector<std::uint64_t> suffix_counts(n + 2, 0);
  for (std::uint32_t j = n; j >= 2; --j) {
    suffix_counts[j] = suffix_counts[j + 1] + keys.keys(j).size();
  }
  const std::uint64_t b1 = use_frontier ? keys.b1_frontier.size() : keys.keys(1).size();
  for (std::uint32_t i = 2; i <= n; ++i) {
    above = suffix_counts[i + 1];
    std::uint32_t max_len = 0;
    for (auto k : keys.keys(i)) max_len = std::max<std::uint32_t>(max_len, static_cast<std::uint32_t>(k.size()));
    stats.push_back({i, keys.keys(i).size(), b1 + above, max_len});
  }
  return stats;
}

namespace {

std::optional<std::uint64_t> trie_nodes_above(const BucketedKeys& keys, std::uint32_t threshold) {
  std::vector<CompactTrie::Entry> entries;
  for (std::uint32_t j = threshold + 1; j <= keys.bucket_count(); ++j) {
    for (auto k : keys.keys(j)) entries.emplace_back(k, j);
  }
  try {
    return CompactTrie::build(entries, threshold).node_count();
  } catch (const TrieBuildError&) {
    return std::nullopt;
  }
}

}  // namespace

Plan select_plan(const BucketedKeys& keys, const Config& config) {
  config.validate();
  const std::uint32_t n = keys.bucket_count();
  Plan best;
  best.p_n = config.p_n;
  if (n <= 1) return best;

  const auto stats = bucket_stats(keys, config.use_frontier);
  const auto layers = default_layer_candidates();

  std::uint32_t hi_tau = n;
  std::uint32_t lo_tau = n > CompactTrie::kMaxOffset + 2 ? n - CompactTrie::kMaxOffset : 2;
  if (config.tree_threshold) {
    hi_tau = lo_tau = std::min(*config.tree_threshold, n);
    if (n - hi_tau > CompactTrie::kMaxOffset) {
      throw TrieBuildError(TrieBuildError::Kind::ThresholdTooLow,
                           "tree threshold too low: " + std::to_string(n - hi_tau) +
                               " buckets above it, at most 15 fit the trie");
    }
  }

  // Without p_n the per-bucket optimum does not depend on τ.
  std::vector<std::optional<BucketPlan>> unconstrained(n + 1);
  bool have_best = false;
  std::string last_failure;

  for (std::uint32_t tau = hi_tau; tau >= lo_tau; --tau) {
    Plan candidate;
    candidate.threshold = tau;
    candidate.p_n = config.p_n;
    bool feasible = true;
    for (std::uint32_t i = 2; i <= tau && feasible; ++i) {
      const BucketStats& s = stats[i - 2];
      try {
        if (!config.p_n) {
          if (!unconstrained[i]) unconstrained[i] = optimize_bucket(s, layers);
          candidate.buckets.push_back(*unconstrained[i]);
        } else {
          const double p_n = *config.p_n;
          candidate.buckets.push_back(optimize_bucket(s, layers, [&](std::uint32_t m) {
            return FRange{kMinFalsePositive, std::min(kMaxFalsePositive, prob::feasible_f_max(p_n, tau, m))};
          }));
        }
      } catch (const InfeasibleError& e) {
        feasible = false;
        last_failure = e.what();
      }
    }
    if (feasible && tau < n) {
      if (auto nodes = trie_nodes_above(keys, tau)) {
        candidate.trie_nodes = *nodes;
        candidate.trie_bits = 8.0 * static_cast<double>(2 + 4 * *nodes);
      } else {
        feasible = false;
      }
    }
    if (feasible) {
      for (const auto& b : candidate.buckets) candidate.filter_bits += b.total_bits();
      if (!have_best || candidate.predicted_bits() < best.predicted_bits()) {
        best = std::move(candidate);
        have_best = true;
      }
    }
    if (tau == lo_tau) break;
  }
  if (!have_best) {
    const std::string prefix = "infeasible constraint";
    if (last_failure.empty()) last_failure = "no tree threshold admits a plan";
    throw InfeasibleError(last_failure.starts_with(prefix) ? last_failure : prefix + ": " + last_failure);
  }
  return best;
}

}  // namespace likecard
