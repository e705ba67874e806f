#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace likecard {

/// The three fundamental LIKE shapes: `S%`, `%S` and `%S%`.
enum class PatternKind : std::uint8_t { Prefix = 0, Suffix = 1, Substring = 2 };

[[nodiscard]] std::string_view to_string(PatternKind kind) noexcept;

/// Parses "prefix", "suffix" or "substring". Throws std::invalid_argument.
[[nodiscard]] PatternKind parse_kind(std::string_view text);

/// A LIKE query. `body` is the literal between the wildcards, as written.
struct Query {
  PatternKind kind = PatternKind::Prefix;
  std::string body;

  /// Parses `S%`, `%S` or `%S%`. A `%` is only a wildcard at either end;
  /// interior `%`, a missing wildcard or an empty literal is rejected.
  [[nodiscard]] static Query parse(std::string_view text);

  /// The text form, e.g. `%abc%`.
  [[nodiscard]] std::string pattern() const;

  friend bool operator==(const Query&, const Query&) = default;
};

/// Canonical form of a query body. Suffix bodies are reversed so that, for
/// every kind, pattern P covers pattern Q iff canonical(P) is a byte-prefix of
/// canonical(Q).
[[nodiscard]] std::string canonical_body(const Query& query);

/// Inverse of canonical_body for a given kind.
[[nodiscard]] std::string raw_body(PatternKind kind, std::string_view canonical);

/// Reverses each string (used to treat suffix patterns as prefix patterns).
[[nodiscard]] std::vector<std::string> reverse_each(const std::vector<std::string>& strings);

/// User-facing estimator configuration.
struct Config {
  double eb = 1.5;
  std::uint32_t max_len = 10;
  std::optional<double> p_n;
  std::optional<std::uint32_t> tree_threshold;
  bool use_frontier = true;
  bool long_queries = false;

  /// Throws std::invalid_argument when eb <= 1, max_len < 2, p_n outside (0,1)
  /// or tree_threshold < 2.
  void validate() const;
};

struct Bucket {
  std::uint32_t id = 0;
  std::uint64_t c_l = 0;
  std::uint64_t c_u = 0;
  double est = 0.0;
};

/// Geometric partition of the cardinality domain. Bucket i spans
/// [c_l, floor(c_l * eb^2)] and answers with c_l * eb, so any cardinality
/// routed to its true bucket has Q-error at most eb.
class BucketScheme {
 public:
  /// The smallest scheme covering [1, max_card]. Throws on eb <= 1 or max_card == 0.
  [[nodiscard]] static BucketScheme make(double eb, std::uint64_t max_card);

  /// Exactly `count` buckets (used when reloading a model).
  [[nodiscard]] static BucketScheme with_count(double eb, std::uint32_t count);

  /// Id of the bucket containing `card`. Throws for 0 and for values past the last bucket.
  [[nodiscard]] std::uint32_t bucket_of(std::uint64_t card) const;

  [[nodiscard]] const Bucket& bucket(std::uint32_t id) const { return buckets_.at(id - 1); }
  [[nodiscard]] const std::vector<Bucket>& buckets() const noexcept { return buckets_; }
  [[nodiscard]] std::uint32_t size() const noexcept { return static_cast<std::uint32_t>(buckets_.size()); }
  [[nodiscard]] double eb() const noexcept { return eb_; }
  [[nodiscard]] std::uint64_t max_coverage() const noexcept { return buckets_.back().c_u; }

 private:
  BucketScheme(double eb, std::vector<Bucket> buckets) : eb_(eb), buckets_(std::move(buckets)) {}
  static Bucket next_bucket(double eb, std::uint32_t id, std::uint64_t c_l);

  double eb_;
  std::vector<Bucket> buckets_;
};

/// max(est/true_card, true_card/est). Both arguments must be positive.
[[nodiscard]] double q_error(double est, double true_card);

}  // namespace likecard
