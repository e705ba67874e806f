#include "likecard/bloom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "likecard/hash.hpp"

namespace likecard {

std::uint64_t bloom_bits_for(std::uint64_t capacity, double f) {
  const double ln2 = std::numbers::ln2;
  return static_cast<std::uint64_t>(std::ceil(static_cast<double>(capacity) * -std::log(f) / (ln2 * ln2)));
}

BloomFilter::BloomFilter(std::uint64_t seed, std::uint32_t n_bits, std::uint16_t k_hashes, double target_f)
    : seed_(seed), n_bits_(n_bits), k_hashes_(k_hashes), target_f_(target_f), words_((static_cast<std::size_t>(n_bits) + 63) / 64, 0) {}

BloomFilter BloomFilter::make(std::uint64_t capacity, double f, std::uint64_t seed) {
  if (!(f > 0.0 && f < 1.0)) throw std::invalid_argument("bloom false-positive rate must lie in (0, 1)");
  if (capacity == 0) throw std::invalid_argument("bloom capacity must be positive");
  const std::uint64_t bits = std::max<std::uint64_t>(1, bloom_bits_for(capacity, f));
  if (bits > std::numeric_limits<std::uint32_t>::max()) throw std::length_error("bloom filter too large");
  const double k = std::round(static_cast<double>(bits) / static_cast<double>(capacity) * std::numbers::ln2);
  const auto k_hashes = static_cast<std::uint16_t>(std::clamp(k, 1.0, 64.0));
  return BloomFilter(seed, static_cast<std::uint32_t>(bits), k_hashes, f);
}

BloomFilter BloomFilter::degenerate(std::uint64_t seed) { return BloomFilter(seed, 0, 0, 0.0); }

void BloomFilter::insert(std::string_view key) noexcept {
  ++n_inserted_;
  if (n_bits_ == 0) return;
  const std::uint64_t h1 = hash64(key, seed_);
  const std::uint64_t h2 = mix64(h1) | 1;
  std::uint64_t h = h1;
  for (std::uint16_t i = 0; i < k_hashes_; ++i, h += h2) {
    const std::uint64_t bit = h % n_bits_;
    words_[bit >> 6] |= std::uint64_t{1} << (bit & 63);
  }
}

bool BloomFilter::contains(std::string_view key) const noexcept {
  if (n_bits_ == 0) return false;
  const std::uint64_t h1 = hash64(key, seed_);
  const std::uint64_t h2 = mix64(h1) | 1;
  std::uint64_t h = h1;
  for (std::uint16_t i = 0; i < k_hashes_; ++i, h += h2) {
    const std::uint64_t bit = h % n_bits_;
    if ((words_[bit >> 6] & (std::uint64_t{1} << (bit & 63))) == 0) return false;
  }
  return true;
}

void BloomFilter::serialize(detail::ByteWriter& out) const {
  out.put<std::uint64_t>(seed_);
  out.put<std::uint32_t>(n_bits_);
  out.put<std::uint16_t>(k_hashes_);
  for (auto w : words_) out.put<std::uint64_t>(w);
}

BloomFilter BloomFilter::deserialize(detail::ByteReader& in) {
  const auto seed = in.get<std::uint64_t>();
  const auto n_bits = in.get<std::uint32_t>();
  const auto k = in.get<std::uint16_t>();
  in.need((static_cast<std::size_t>(n_bits) + 63) / 64 * 8);
  BloomFilter filter(seed, n_bits, k, 0.0);
  for (auto& w : filter.words_) w = in.get<std::uint64_t>();
  return filter;
}

}  // namespace likecard
