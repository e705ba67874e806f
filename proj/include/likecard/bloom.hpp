#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "likecard/detail/binary_io.hpp"

namespace likecard {

/// Bloom filter with double hashing over one keyed 64-bit hash.
///
/// Sized for a capacity n and target rate f with n_bits = ceil(n * -ln f / ln^2 2)
/// and k = max(1, round(n_bits / n * ln 2)). Filters with different seeds give
/// independent membership tests. A filter built for capacity 0 holds no bits
/// and rejects every key.
class BloomFilter {
 public:
  /// Throws std::invalid_argument unless 0 < f < 1 and capacity >= 1.
  [[nodiscard]] static BloomFilter make(std::uint64_t capacity, double f, std::uint64_t seed);

  /// The always-false filter.
  [[nodiscard]] static BloomFilter degenerate(std::uint64_t seed);

  void insert(std::string_view key) noexcept;
  [[nodiscard]] bool contains(std::string_view key) const noexcept;

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::uint32_t n_bits() const noexcept { return n_bits_; }
  [[nodiscard]] std::uint16_t k_hashes() const noexcept { return k_hashes_; }
  [[nodiscard]] double target_f() const noexcept { return target_f_; }
  [[nodiscard]] std::uint64_t n_inserted() const noexcept { return n_inserted_; }
  [[nodiscard]] bool is_degenerate() const noexcept { return n_bits_ == 0; }

  /// 8-byte seed, 4-byte n_bits, 2-byte k, then ceil(n_bits/64) 64-bit words.
  void serialize(detail::ByteWriter& out) const;
  [[nodiscard]] static BloomFilter deserialize(detail::ByteReader& in);
  [[nodiscard]] std::uint64_t serialized_bytes() const noexcept { return 14 + 8 * words_.size(); }

  friend bool operator==(const BloomFilter& a, const BloomFilter& b) noexcept {
    return a.seed_ == b.seed_ && a.n_bits_ == b.n_bits_ && a.k_hashes_ == b.k_hashes_ && a.words_ == b.words_;
  }

 private:
  BloomFilter(std::uint64_t seed, std::uint32_t n_bits, std::uint16_t k_hashes, double target_f);

  std::uint64_t seed_;
  std::uint32_t n_bits_;
  std::uint16_t k_hashes_;
  double target_f_;
  std::uint64_t n_inserted_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Bits a filter of `capacity` keys at rate f needs (before word padding).
[[nodiscard]] std::uint64_t bloom_bits_for(std::uint64_t capacity, double f);

}  // namespace likecard
