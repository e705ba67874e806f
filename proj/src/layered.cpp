#include "likecard/layered.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

#include "likecard/hash.hpp"

namespace likecard {

LookupTable::LookupTable(Role role, std::vector<std::string> entries) : role_(role), entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end());
  entries_.erase(std::unique(entries_.begin(), entries_.end()), entries_.end());
}

bool LookupTable::contains(std::string_view key) const noexcept {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                             [](const std::string& e, std::string_view k) { return std::string_view(e) < k; });
  return it != entries_.end() && *it == key;
}

void LookupTable::serialize(detail::ByteWriter& out) const {
  out.put<std::uint32_t>(static_cast<std::uint32_t>(entries_.size()));
  for (const auto& e : entries_) {
    out.put<std::uint16_t>(static_cast<std::uint16_t>(e.size()));
    out.put_bytes(e);
  }
}

LookupTable LookupTable::deserialize(detail::ByteReader& in, Role role) {
  const auto count = in.get<std::uint32_t>();
  in.need(static_cast<std::size_t>(count) * 2);
  std::vector<std::string> entries;
  entries.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto len = in.get<std::uint16_t>();
    entries.emplace_back(in.get_bytes(len));
  }
  return LookupTable(role, std::move(entries));
}

std::uint64_t LookupTable::serialized_bytes() const noexcept {
  std::uint64_t bytes = 4;
  for (const auto& e : entries_) bytes += 2 + e.size();
  return bytes;
}

LayeredFilter LayeredFilter::build(std::uint32_t bucket_id, std::span<const std::string_view> positives,
                                   std::span<const std::string_view> negatives, std::uint32_t m, double f,
                                   std::uint64_t seed) {
  if (m < 2 || m > 255) throw std::invalid_argument("layer count must lie in [2, 255]");
  if (!(f > 0.0 && f < 1.0)) throw std::invalid_argument("false-positive rate must lie in (0, 1)");
  {
    const std::unordered_set<std::string_view> pos_set(positives.begin(), positives.end());
    for (auto key : negatives) {
      if (pos_set.contains(key)) {
        throw std::invalid_argument("key '" + std::string(key) + "' is both positive and negative");
      }
    }
  }

  LayeredFilter out;
  out.bucket_id_ = bucket_id;
  out.f_ = f;
  std::vector<std::string_view> pos(positives.begin(), positives.end());
  std::vector<std::string_view> neg(negatives.begin(), negatives.end());

  auto make_layer = [&](const std::vector<std::string_view>& keys, std::uint64_t layer_seed) {
    if (keys.empty()) return BloomFilter::degenerate(layer_seed);
    auto bloom = BloomFilter::make(keys.size(), f, layer_seed);
    for (auto k : keys) bloom.insert(k);
    return bloom;
  };
  auto keep_passing = [](std::vector<std::string_view>& keys, const BloomFilter& bloom) {
    std::erase_if(keys, [&](std::string_view k) { return !bloom.contains(k); });
  };

  for (std::uint32_t layer = 1; layer < m; ++layer) {
    out.trace_.push_back({pos.size(), neg.size()});
    if (layer % 2 == 1) {
      out.blooms_.push_back(make_layer(pos, derive_seed(seed, layer)));
      keep_passing(neg, out.blooms_.back());
    } else {
      out.blooms_.push_back(make_layer(neg, derive_seed(seed, layer)));
      keep_passing(pos, out.blooms_.back());
    }
  }
  out.trace_.push_back({pos.size(), neg.size()});

  const bool odd = m % 2 == 1;
  const auto& survivors = odd ? pos : neg;
  out.table_ = LookupTable(odd ? LookupTable::Role::Positives : LookupTable::Role::Negatives,
                           std::vector<std::string>(survivors.begin(), survivors.end()));
  return out;
}

bool LayeredFilter::classify(std::string_view key) const noexcept {
  for (std::size_t i = 0; i < blooms_.size(); ++i) {
    const bool hit = blooms_[i].contains(key);
    const bool odd_layer = i % 2 == 0;
    if (!hit) return !odd_layer;
  }
  const bool present = table_.contains(key);
  return table_.role() == LookupTable::Role::Positives ? present : !present;
}

void LayeredFilter::serialize(detail::ByteWriter& out) const {
  out.put<std::uint8_t>(static_cast<std::uint8_t>(layers()));
  out.put<double>(f_);
  for (const auto& b : blooms_) b.serialize(out);
  table_.serialize(out);
}

LayeredFilter LayeredFilter::deserialize(detail::ByteReader& in, std::uint32_t bucket_id) {
  LayeredFilter out;
  out.bucket_id_ = bucket_id;
  const auto m = in.get<std::uint8_t>();
  if (m < 2) {
    throw ModelFormatError(ModelFormatError::Kind::ChecksumMismatch, "corrupt model: layered filter with fewer than 2 layers");
  }
  out.f_ = in.get<double>();
  for (std::uint32_t layer = 1; layer < m; ++layer) out.blooms_.push_back(BloomFilter::deserialize(in));
  out.table_ =
      LookupTable::deserialize(in, m % 2 == 1 ? LookupTable::Role::Positives : LookupTable::Role::Negatives);
  return out;
}

std::uint64_t LayeredFilter::serialized_bytes() const noexcept {
  std::uint64_t bytes = 1 + 8 + table_.serialized_bytes();
  for (const auto& b : blooms_) bytes += b.serialized_bytes();
  return bytes;
}

std::vector<std::string_view> frontier(std::span<const std::string_view> b1_keys) {
  const std::unordered_set<std::string_view> all(b1_keys.begin(), b1_keys.end());
  std::vector<std::string_view> out;
  for (auto key : b1_keys) {
    bool covered = false;
    for (std::size_t len = 1; len < key.size() && !covered; ++len) covered = all.contains(key.substr(0, len));
    if (!covered) out.push_back(key);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

BucketedKeys bucketize(const PatternCatalog& catalog, const BucketScheme& scheme) {
  BucketedKeys out;
  out.by_bucket.resize(static_cast<std::size_t>(scheme.size()) + 1);
  for (const auto& [key, card] : catalog.entries()) out.by_bucket[scheme.bucket_of(card)].emplace_back(key);
  for (auto& group : out.by_bucket) std::sort(group.begin(), group.end());
  out.b1_frontier = frontier(out.by_bucket[1]);
  return out;
}

std::vector<std::string_view> collect_negatives(const BucketedKeys& keys, std::uint32_t target,
                                                std::uint32_t threshold, bool use_frontier) {
  if (target < 2 || target > threshold || target > keys.bucket_count()) {
    throw std::invalid_argument("target bucket must lie in [2, threshold]");
  }
  const auto& b1 = use_frontier ? keys.b1_frontier : keys.by_bucket[1];
  std::vector<std::string_view> out(b1.begin(), b1.end());
  for (std::uint32_t j = target + 1; j <= keys.bucket_count(); ++j) {
    out.insert(out.end(), keys.by_bucket[j].begin(), keys.by_bucket[j].end());
  }
  return out;
}

std::uint32_t classify(std::span<const LayeredFilter> filters, const CompactTrie* trie,
                       std::string_view key) noexcept {
  for (const auto& filter : filters) {
    if (filter.classify(key)) return filter.bucket_id();
  }
  if (trie != nullptr) {
    if (auto id = trie->lookup(key)) return *id;
  }
  return 1;
}

}  // namespace likecard
