#include "likecard/hash.hpp"

#include <cstring>

namespace likecard {

std::uint64_t hash64(std::string_view data, std::uint64_t seed) noexcept {
  constexpr std::uint64_t m = 0xc6a4a7935bd1e995ULL;
  constexpr int r = 47;

  std::uint64_t h = seed ^ (data.size() * m);
  const char* p = data.data();
  std::size_t left = data.size();

  while (left >= 8) {
    std::uint64_t k;
    std::memcpy(&k, p, 8);
    k *= m;
    k ^= k >> r;
    k *= m;
    h ^= k;
    h *= m;
    p += 8;
    left -= 8;
  }

  std::uint64_t tail = 0;
  for (std::size_t i = left; i-- > 0;) tail = (tail << 8) | static_cast<unsigned char>(p[i]);
  if (left > 0) {
    h ^= tail;
    h *= m;
  }

  h ^= h >> r;
  h *= m;
  h ^= h >> r;
  return h;
}

}  // namespace likecard
