#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "likecard/core.hpp"

namespace likecard {

/// Hash usable for heterogeneous (string_view) lookup in string-keyed maps.
struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
};

/// Every non-empty-answer pattern of length <= max_len with its exact
/// cardinality. Keys are canonical bodies (suffix bodies reversed).
class PatternCatalog {
 public:
  using Map = std::unordered_map<std::string, std::uint64_t, StringHash, std::equal_to<>>;

  PatternCatalog(PatternKind kind, std::uint32_t max_len, std::uint64_t dataset_size, Map entries);

  [[nodiscard]] PatternKind kind() const noexcept { return kind_; }
  [[nodiscard]] std::uint32_t max_len() const noexcept { return max_len_; }
  [[nodiscard]] std::uint64_t dataset_size() const noexcept { return dataset_size_; }
  [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
  [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }
  [[nodiscard]] const Map& entries() const noexcept { return entries_; }
  [[nodiscard]] std::uint64_t max_cardinality() const noexcept { return max_card_; }

  /// Cardinality of a canonical body, or nullopt when it is not a catalog member.
  [[nodiscard]] std::optional<std::uint64_t> find(std::string_view canonical) const;

  /// Canonical keys in byte order; views stay valid for the catalog's lifetime.
  [[nodiscard]] std::vector<std::string_view> sorted_keys() const;

 private:
  PatternKind kind_;
  std::uint32_t max_len_;
  std::uint64_t dataset_size_;
  Map entries_;
  std::uint64_t max_card_ = 0;
};

/// Enumerates every distinct pattern of length <= max_len that occurs in the
/// dataset. A string counts at most once per pattern, so substring
/// cardinalities count containing rows, not occurrences. Duplicate rows each count.
[[nodiscard]] PatternCatalog enumerate(const std::vector<std::string>& dataset, PatternKind kind,
                                       std::uint32_t max_len);

/// Brute-force LIKE scan; the reference the catalog is checked against.
[[nodiscard]] std::uint64_t exact_cardinality(const std::vector<std::string>& dataset, const Query& query);

enum class WorkloadSplit : std::uint8_t { Train, Test };

struct WorkloadEntry {
  Query query;
  std::uint64_t cardinality = 0;

  friend bool operator==(const WorkloadEntry&, const WorkloadEntry&) = default;
};

struct Workload {
  std::vector<WorkloadEntry> entries;
  WorkloadSplit split = WorkloadSplit::Test;
};

/// Samples `n_pos` catalog patterns without replacement (all of them if the
/// catalog is smaller) and builds `n_neg` verified empty-answer queries by
/// appending 1..max_extra bytes of the dataset's alphabet to sampled catalog
/// patterns. Appending happens on the canonical body and the result never
/// exceeds the catalog's max length. Deterministic in `seed`.
///
/// Throws std::runtime_error when fewer than n_neg empty queries turn up
/// within 10 * n_neg attempts (the alphabet is too small for empty patterns).
[[nodiscard]] Workload gen_workload(const PatternCatalog& catalog, const std::vector<std::string>& dataset,
                                    std::size_t n_pos, std::size_t n_neg, std::size_t max_extra,
                                    std::uint64_t seed);

/// Distinct bytes occurring in the dataset, ascending.
[[nodiscard]] std::string dataset_alphabet(const std::vector<std::string>& dataset);

// ---- file formats ---------------------------------------------------------

/// Newline-delimited rows; only the trailing '\n' is stripped.
[[nodiscard]] std::vector<std::string> read_dataset(const std::string& path);
[[nodiscard]] std::vector<std::string> parse_dataset(std::istream& in);

/// `kind<TAB>raw-body<TAB>cardinality` per line. Control bytes, DEL and the
/// backslash are written as `\xNN`.
void write_workload(std::ostream& out, const Workload& workload);
void write_workload(const std::string& path, const Workload& workload);
[[nodiscard]] Workload read_workload(std::istream& in);
[[nodiscard]] Workload read_workload(const std::string& path);

[[nodiscard]] std::string escape_bytes(std::string_view raw);
[[nodiscard]] std::string unescape_bytes(std::string_view text);

}  // namespace likecard
