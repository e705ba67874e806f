#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "likecard/core.hpp"
#include "likecard/groundtruth.hpp"
#include "likecard/layered.hpp"
#include "likecard/paramsel.hpp"
#include "likecard/treeindex.hpp"

namespace likecard {

inline constexpr std::uint16_t kModelFormatVersion = 1;
inline constexpr char kModelMagic[4] = {'L', 'R', 'N', 'T'};

/// How queries of length <= L are routed to a bucket.
enum class Routing {
  PrefixWalk,  ///< classify the query and all its canonical prefixes
  Direct,      ///< classify the query alone
};

/// Bucket decision of the prefix walk from ids b_0 (full query) .. b_{t-1}
/// (shortest prefix): 1 if any id is 1 or if some shorter prefix has a smaller
/// id than the longer one before it; b_0 otherwise.
[[nodiscard]] std::uint32_t walk_decision(std::span<const std::uint32_t> ids);

/// One conditional factor of the Markov chain: estimate of the length-L
/// window over the estimate of its first L-1 bytes.
struct WindowRatio {
  double numerator = 0.0;
  double denominator = 0.0;
};

/// base * prod(min(1, numerator/denominator)), floored at `floor`.
[[nodiscard]] double compose_markov(double base, std::span<const WindowRatio> ratios, double floor);

/// A built cardinality estimator for one pattern kind.
///
/// Every catalog pattern of length <= L is routed to its true bucket, so its
/// estimate is within a factor eb of the truth. Longer queries go through the
/// Markov chain over length-L windows. Immutable once built; all queries are
/// const and safe to run concurrently.
class EstimatorModel {
 public:
  /// Enumerate, bucketize, plan, then build the layered filters and the trie.
  /// With config.long_queries, prefix and suffix models also carry a
  /// companion substring model over the canonical rows.
  [[nodiscard]] static EstimatorModel build(const std::vector<std::string>& dataset, PatternKind kind,
                                            const Config& config, std::uint64_t seed);

  /// Build from an existing catalog (no companion model).
  [[nodiscard]] static EstimatorModel build(const PatternCatalog& catalog, const Config& config,
                                            std::uint64_t seed);

  /// Estimated cardinality; never below bucket 1's estimate. Throws
  /// std::invalid_argument on a kind mismatch or empty body and
  /// LongQueryUnsupported for long prefix/suffix queries without a companion.
  [[nodiscard]] double estimate(const Query& query, Routing routing = Routing::PrefixWalk) const;

  /// estimate() for a canonical body of this model's kind.
  [[nodiscard]] double estimate_canonical(std::string_view canonical, Routing routing = Routing::PrefixWalk) const;

  [[nodiscard]] std::uint32_t classify_direct(std::string_view canonical) const noexcept;
  [[nodiscard]] std::uint32_t classify_with_prefix_walk(std::string_view canonical) const;

  /// Markov estimate for a query with |body| >= L (|body| == L gives the
  /// direct estimate exactly).
  [[nodiscard]] double markov_estimate(const Query& query) const;

  [[nodiscard]] const Config& config() const noexcept { return config_; }
  [[nodiscard]] PatternKind kind() const noexcept { return kind_; }
  [[nodiscard]] const BucketScheme& scheme() const noexcept { return scheme_; }
  [[nodiscard]] std::uint64_t dataset_size() const noexcept { return dataset_size_; }
  [[nodiscard]] std::uint64_t master_seed() const noexcept { return master_seed_; }
  [[nodiscard]] std::uint32_t threshold() const noexcept { return threshold_; }
  [[nodiscard]] const std::vector<LayeredFilter>& filters() const noexcept { return filters_; }
  [[nodiscard]] const std::optional<CompactTrie>& trie() const noexcept { return trie_; }
  [[nodiscard]] const EstimatorModel* companion() const noexcept { return companion_.get(); }
  /// The planner's output; only bucket layer counts and rates survive a reload.
  [[nodiscard]] const Plan& plan() const noexcept { return plan_; }

  /// Bits held by filters and trie as serialized (headers included).
  [[nodiscard]] std::uint64_t structure_bits() const noexcept;

  [[nodiscard]] std::string serialize() const;
  /// Throws ModelFormatError on bad magic, unknown version, truncation or a
  /// checksum mismatch.
  [[nodiscard]] static EstimatorModel deserialize(std::string_view bytes);
  void save(const std::string& path) const;
  [[nodiscard]] static EstimatorModel load(const std::string& path);

 private:
  EstimatorModel(Config config, PatternKind kind, BucketScheme scheme)
      : config_(std::move(config)), kind_(kind), scheme_(std::move(scheme)) {}

  void write_body(detail::ByteWriter& out) const;
  static EstimatorModel read_body(detail::ByteReader& in);
  double short_estimate(std::string_view canonical, Routing routing) const;
  double markov_canonical(std::string_view canonical, Routing routing) const;

  Config config_;
  PatternKind kind_;
  BucketScheme scheme_;
  std::uint64_t dataset_size_ = 0;
  std::uint64_t master_seed_ = 0;
  std::uint32_t threshold_ = 1;
  std::vector<LayeredFilter> filters_;
  std::optional<CompactTrie> trie_;
  std::shared_ptr<const EstimatorModel> companion_;
  Plan plan_;
};

}  // namespace likecard
