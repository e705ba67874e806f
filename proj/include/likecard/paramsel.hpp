#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "likecard/core.hpp"
#include "likecard/layered.hpp"

namespace likecard {

/// Lower end of every false-positive search; Bloom sizing dominates below it.
inline constexpr double kMinFalsePositive = 1e-6;
/// Upper end of the unconstrained search.
inline constexpr double kMaxFalsePositive = 0.5;
/// Default layer counts tried per bucket.
inline constexpr std::uint32_t kMinLayers = 2;
inline constexpr std::uint32_t kMaxLayers = 8;
/// Objective evaluations spent in the global phase of the f search.
inline constexpr int kDirectBudget = 200;

struct BucketStats {
  std::uint32_t bucket_id = 0;
  std::uint64_t n_pos = 0;
  std::uint64_t n_neg = 0;
  std::uint32_t max_len = 0;
};

enum class Parity { Odd, Even };

/// Expected bits of one bucket's cascade with a shared rate f.
/// Odd  (m = 2k+1): -ln f/ln²2 * (Np + Nn f)/(1-f) * (1-f^k) + 8 L Np f^k
/// Even (m = 2k):   -ln f/ln²2 * [Np (1-f^k) + Nn f (1-f^(k-1))]/(1-f) + 8 L Nn f^k
[[nodiscard]] double storage_cost(std::uint32_t k, double f, double n_pos, double n_neg, double max_len,
                                  Parity parity);

/// storage_cost with k and parity derived from the layer count m.
[[nodiscard]] double storage_cost_for_layers(std::uint32_t m, double f, const BucketStats& stats);

struct MinimizeResult {
  double x = 0.0;
  double value = 0.0;
  int evaluations = 0;
};

/// Deterministic 1-D global minimisation on [lo, hi]: DIRECT interval
/// trisection for `budget` evaluations, then bisection on the finite-difference
/// slope inside the best interval.
[[nodiscard]] MinimizeResult direct_minimize(const std::function<double(double)>& fn, double lo, double hi,
                                             int budget = kDirectBudget);

struct FRange {
  double lo = kMinFalsePositive;
  double hi = kMaxFalsePositive;
};

/// Fixed serialized bits of an m-layer filter: layer count, rate, one header
/// per Bloom layer and the table's entry count.
[[nodiscard]] double filter_overhead_bits(std::uint32_t m);

struct BucketPlan {
  std::uint32_t bucket_id = 0;
  std::uint32_t m = 2;
  double f = kMaxFalsePositive;
  double predicted_bits = 0.0;  ///< storage_cost at (m, f)
  double overhead_bits = 0.0;   ///< filter_overhead_bits(m)
  BucketStats stats;

  [[nodiscard]] double total_bits() const noexcept { return predicted_bits + overhead_bits; }
};

/// Best (m, f) for one bucket by storage_cost plus fixed overhead. The f
/// search for each m runs over ln f in range_for(m); layer counts with an
/// empty range are skipped.
/// Throws InfeasibleError when every range is empty.
[[nodiscard]] BucketPlan optimize_bucket(const BucketStats& stats, std::span<const std::uint32_t> m_candidates,
                                         const std::function<FRange(std::uint32_t)>& range_for);
[[nodiscard]] BucketPlan optimize_bucket(const BucketStats& stats, std::span<const std::uint32_t> m_candidates,
                                         FRange range = {});

/// Layer counts kMinLayers..kMaxLayers.
[[nodiscard]] std::vector<std::uint32_t> default_layer_candidates();

struct Plan {
  std::uint32_t threshold = 1;       ///< τ: buckets 2..τ get layered filters
  std::vector<BucketPlan> buckets;   ///< one per bucket 2..τ, ascending
  std::uint64_t trie_nodes = 0;      ///< 0 when no trie is needed
  double filter_bits = 0.0;
  double trie_bits = 0.0;
  std::optional<double> p_n;

  [[nodiscard]] double predicted_bits() const noexcept { return filter_bits + trie_bits; }
  /// Modelled fall-through probability q = prod over filtered buckets of (1 - p_bucket(f_i, m_i)).
  [[nodiscard]] double fallthrough_probability() const;
  /// p_b1_prefix_walk(q, 2, τ); nullopt when nothing is filtered (τ < 2).
  [[nodiscard]] std::optional<double> walk_probability() const;
};

/// Per-bucket statistics as the layered build will see them.
[[nodiscard]] std::vector<BucketStats> bucket_stats(const BucketedKeys& keys, bool use_frontier);

/// Picks τ and a (m, f) per filtered bucket minimising predicted bits.
/// Candidates run from n down to max(2, n-15); buckets above τ are costed as
/// the compact trie over their keys. With p_n set, f is confined to the
/// feasible range for n' = τ. A configured tree threshold pins τ.
[[nodiscard]] Plan select_plan(const BucketedKeys& keys, const Config& config);

}  // namespace likecard
