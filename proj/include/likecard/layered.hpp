#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "likecard/bloom.hpp"
#include "likecard/core.hpp"
#include "likecard/detail/binary_io.hpp"
#include "likecard/groundtruth.hpp"
#include "likecard/treeindex.hpp"

namespace likecard {

/// Exact set of byte strings closing a layered filter.
class LookupTable {
 public:
  enum class Role : std::uint8_t { Positives, Negatives };

  LookupTable() = default;
  LookupTable(Role role, std::vector<std::string> entries);

  [[nodiscard]] bool contains(std::string_view key) const noexcept;
  [[nodiscard]] Role role() const noexcept { return role_; }
  [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
  [[nodiscard]] const std::vector<std::string>& entries() const noexcept { return entries_; }

  /// 32-bit count, then each entry as a 16-bit length and its bytes, in byte order.
  void serialize(detail::ByteWriter& out) const;
  [[nodiscard]] static LookupTable deserialize(detail::ByteReader& in, Role role);
  [[nodiscard]] std::uint64_t serialized_bytes() const noexcept;

 private:
  Role role_ = Role::Positives;
  std::vector<std::string> entries_;  // sorted, unique
};

/// Sizes of the positive and negative sets each layer was built against.
struct LayerTrace {
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

/// Cascade of m-1 Bloom filters and a final exact table that decides
/// membership in one bucket.
///
/// Odd layers (1st, 3rd, ...) hold the positives still in play, even layers the
/// negatives that slipped through the previous filter. The table holds the
/// surviving positives when m is odd and the surviving negatives when m is
/// even. Every key supplied at build time is classified exactly.
class LayeredFilter {
 public:
  /// Throws std::invalid_argument when m < 2, m > 255, f outside (0,1) or the
  /// two key sets overlap. Layer j is seeded with derive_seed(seed, j).
  [[nodiscard]] static LayeredFilter build(std::uint32_t bucket_id, std::span<const std::string_view> positives,
                                           std::span<const std::string_view> negatives, std::uint32_t m,
                                           double f, std::uint64_t seed);

  /// True when the key belongs to this bucket.
  [[nodiscard]] bool classify(std::string_view key) const noexcept;

  [[nodiscard]] std::uint32_t bucket_id() const noexcept { return bucket_id_; }
  [[nodiscard]] std::uint32_t layers() const noexcept { return static_cast<std::uint32_t>(blooms_.size()) + 1; }
  [[nodiscard]] double f() const noexcept { return f_; }
  [[nodiscard]] const std::vector<BloomFilter>& blooms() const noexcept { return blooms_; }
  [[nodiscard]] const LookupTable& table() const noexcept { return table_; }

  /// Populated by build() only; empty after deserialize().
  [[nodiscard]] const std::vector<LayerTrace>& trace() const noexcept { return trace_; }

  /// m as u8, f as f64, the m-1 Bloom filters, then the table.
  void serialize(detail::ByteWriter& out) const;
  [[nodiscard]] static LayeredFilter deserialize(detail::ByteReader& in, std::uint32_t bucket_id);
  [[nodiscard]] std::uint64_t serialized_bytes() const noexcept;

 private:
  std::uint32_t bucket_id_ = 0;
  double f_ = 0.0;
  std::vector<BloomFilter> blooms_;
  LookupTable table_;
  std::vector<LayerTrace> trace_;
};

/// Keys of `b1_keys` that have no strict byte-prefix inside `b1_keys`.
[[nodiscard]] std::vector<std::string_view> frontier(std::span<const std::string_view> b1_keys);

/// Catalog keys grouped by true bucket. by_bucket[0] is unused; each group is
/// sorted. Views point into the catalog.
struct BucketedKeys {
  std::vector<std::vector<std::string_view>> by_bucket;
  std::vector<std::string_view> b1_frontier;

  [[nodiscard]] std::uint32_t bucket_count() const noexcept {
    return by_bucket.empty() ? 0 : static_cast<std::uint32_t>(by_bucket.size() - 1);
  }
  [[nodiscard]] const std::vector<std::string_view>& keys(std::uint32_t id) const { return by_bucket.at(id); }
};

[[nodiscard]] BucketedKeys bucketize(const PatternCatalog& catalog, const BucketScheme& scheme);

/// Negatives for bucket `target`: B1 (or its frontier) plus every key of a
/// bucket above `target`, tree-managed buckets included.
[[nodiscard]] std::vector<std::string_view> collect_negatives(const BucketedKeys& keys, std::uint32_t target,
                                                              std::uint32_t threshold, bool use_frontier);

/// Probes filters in ascending bucket order; the first hit wins. Falls back to
/// the trie (when given), then to bucket 1.
[[nodiscard]] std::uint32_t classify(std::span<const LayeredFilter> filters, const CompactTrie* trie,
                                     std::string_view key) noexcept;

}  // namespace likecard
