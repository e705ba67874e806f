#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "likecard/detail/binary_io.hpp"

namespace likecard {

class TrieBuildError : public std::runtime_error {
 public:
  enum class Kind { ThresholdTooLow, TooManyNodes };
  TrieBuildError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  [[nodiscard]] Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Array-packed trie from (canonical) keys to bucket ids above a threshold τ.
///
/// Each node is one 32-bit word:
///   bits  0..7   label byte
///   bits  8..11  bucket id offset (0 = no id here, else id = τ + offset)
///   bits 12..27  index of the first child (0 = leaf)
///   bit  28      last-sibling flag
///   bits 29..31  reserved, zero
/// Index 0 is the virtual root. Children of a node are contiguous and the
/// array is laid out breadth-first.
class CompactTrie {
 public:
  static constexpr std::size_t kMaxNodes = 65535;
  static constexpr std::uint32_t kMaxOffset = 15;

  using Entry = std::pair<std::string_view, std::uint32_t>;

  /// Throws TrieBuildError when an id is outside (τ, τ+15] or the node count
  /// would exceed 65535.
  [[nodiscard]] static CompactTrie build(const std::vector<Entry>& entries, std::uint32_t threshold);

  [[nodiscard]] std::optional<std::uint32_t> lookup(std::string_view key) const noexcept;

  [[nodiscard]] std::size_t node_count() const noexcept { return nodes_.size(); }
  [[nodiscard]] std::uint32_t threshold() const noexcept { return threshold_; }
  [[nodiscard]] const std::vector<std::uint32_t>& nodes() const noexcept { return nodes_; }

  /// 2-byte node count, then each node as a 32-bit word.
  void serialize(detail::ByteWriter& out) const;
  [[nodiscard]] static CompactTrie deserialize(detail::ByteReader& in, std::uint32_t threshold);
  [[nodiscard]] std::uint64_t serialized_bytes() const noexcept { return 2 + 4 * nodes_.size(); }

  static constexpr std::uint8_t label(std::uint32_t node) noexcept { return node & 0xFFu; }
  static constexpr std::uint32_t id_offset(std::uint32_t node) noexcept { return (node >> 8) & 0xFu; }
  static constexpr std::uint32_t first_child(std::uint32_t node) noexcept { return (node >> 12) & 0xFFFFu; }
  static constexpr bool is_last(std::uint32_t node) noexcept { return ((node >> 28) & 1u) != 0; }
  static constexpr std::uint32_t pack(std::uint8_t label, std::uint32_t offset, std::uint32_t child,
                                      bool last) noexcept {
    return label | (offset << 8) | (child << 12) | (static_cast<std::uint32_t>(last) << 28);
  }

 private:
  CompactTrie(std::vector<std::uint32_t> nodes, std::uint32_t threshold)
      : nodes_(std::move(nodes)), threshold_(threshold) {}

  std::vector<std::uint32_t> nodes_;
  std::uint32_t threshold_;
};

}  // namespace likecard
