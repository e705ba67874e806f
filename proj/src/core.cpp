#include "likecard/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace likecard {

std::string_view to_string(PatternKind kind) noexcept {
  switch (kind) {
    case PatternKind::Prefix:
      return "prefix";
    case PatternKind::Suffix:
      return "suffix";
    case PatternKind::Substring:
      return "substring";
  }
  return "unknown";
}

PatternKind parse_kind(std::string_view text) {
  if (text == "prefix") return PatternKind::Prefix;
  if (text == "suffix") return PatternKind::Suffix;
  if (text == "substring") return PatternKind::Substring;
  throw std::invalid_argument("unknown pattern kind '" + std::string(text) +
                              "' (expected prefix, suffix or substring)");
}

Query Query::parse(std::string_view text) {
  std::string_view body = text;
  const bool lead = !body.empty() && body.front() == '%';
  if (lead) body.remove_prefix(1);
  const bool trail = !body.empty() && body.back() == '%';
  if (trail) body.remove_suffix(1);

  if (body.find('%') != std::string_view::npos) {
    throw std::invalid_argument("pattern '" + std::string(text) + "' has an interior wildcard");
  }
  if (!lead && !trail) {
    throw std::invalid_argument("pattern '" + std::string(text) + "' has no wildcard; use S%, %S or %S%");
  }
  if (body.empty()) throw std::invalid_argument("pattern '" + std::string(text) + "' has an empty literal");

  Query q;
  q.kind = lead && trail ? PatternKind::Substring : (lead ? PatternKind::Suffix : PatternKind::Prefix);
  q.body = std::string(body);
  return q;
}

std::string Query::pattern() const {
  switch (kind) {
    case PatternKind::Prefix:
      return body + "%";
    case PatternKind::Suffix:
      return "%" + body;
    case PatternKind::Substring:
      return "%" + body + "%";
  }
  return body;
}

std::string canonical_body(const Query& query) { return raw_body(query.kind, query.body); }

std::string raw_body(PatternKind kind, std::string_view canonical) {
  std::string out(canonical);
  if (kind == PatternKind::Suffix) std::reverse(out.begin(), out.end());
  return out;
}

std::vector<std::string> reverse_each(const std::vector<std::string>& strings) {
  std::vector<std::string> out;
  out.reserve(strings.size());
  for (const auto& s : strings) out.emplace_back(s.rbegin(), s.rend());
  return out;
}

void Config::validate() const {
  if (!(eb > 1.0) || !std::isfinite(eb)) throw std::invalid_argument("eb must be a finite value > 1");
  if (max_len < 2) throw std::invalid_argument("max-len must be at least 2");
  if (max_len > std::numeric_limits<std::uint16_t>::max()) throw std::invalid_argument("max-len too large");
  if (p_n && !(*p_n > 0.0 && *p_n < 1.0)) throw std::invalid_argument("p_n must lie in (0, 1)");
  if (tree_threshold && *tree_threshold < 2) throw std::invalid_argument("tree threshold must be at least 2");
}

Bucket BucketScheme::next_bucket(double eb, std::uint32_t id, std::uint64_t c_l) {
  const double upper = std::floor(static_cast<double>(c_l) * eb * eb);
  if (upper >= 1.8e19) throw std::overflow_error("bucket bound exceeds 64-bit range");
  return Bucket{id, c_l, static_cast<std::uint64_t>(upper), static_cast<double>(c_l) * eb};
}

BucketScheme BucketScheme::make(double eb, std::uint64_t max_card) {
  if (!(eb > 1.0) || !std::isfinite(eb)) throw std::invalid_argument("eb must be a finite value > 1");
  if (max_card == 0) throw std::invalid_argument("max_card must be positive");
  std::vector<Bucket> buckets;
  std::uint64_t c_l = 1;
  do {
    buckets.push_back(next_bucket(eb, static_cast<std::uint32_t>(buckets.size() + 1), c_l));
    c_l = buckets.back().c_u + 1;
  } while (buckets.back().c_u < max_card);
  return BucketScheme(eb, std::move(buckets));
}

BucketScheme BucketScheme::with_count(double eb, std::uint32_t count) {
  if (!(eb > 1.0) || !std::isfinite(eb)) throw std::invalid_argument("eb must be a finite value > 1");
  if (count == 0) throw std::invalid_argument("bucket count must be positive");
  std::vector<Bucket> buckets;
  buckets.reserve(count);
  std::uint64_t c_l = 1;
  for (std::uint32_t id = 1; id <= count; ++id) {
    buckets.push_back(next_bucket(eb, id, c_l));
    c_l = buckets.back().c_u + 1;
  }
  return BucketScheme(eb, std::move(buckets));
}

std::uint32_t BucketScheme::bucket_of(std::uint64_t card) const {
  if (card == 0) throw std::invalid_argument("empty-answer cardinality has no bucket");
  if (card > max_coverage()) throw std::out_of_range("cardinality beyond the last bucket");
  auto it = std::lower_bound(buckets_.begin(), buckets_.end(), card,
                             [](const Bucket& b, std::uint64_t c) { return b.c_u < c; });
  return it->id;
}

double q_error(double est, double true_card) {
  if (!(est > 0.0) || !(true_card > 0.0)) throw std::invalid_argument("q_error needs positive arguments");
  return std::max(est / true_card, true_card / est);
}

}  // namespace likecard
