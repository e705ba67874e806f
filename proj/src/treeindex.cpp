#include "likecard/treeindex.hpp"

#include <algorithm>
#include <deque>
#include <map>

namespace likecard {

namespace {

struct BuildNode {
  std::uint32_t offset = 0;
  std::map<std::uint8_t, std::size_t> children;  // label -> index into pool
};

}  // namespace

CompactTrie CompactTrie::build(const std::vector<Entry>& entries, std::uint32_t threshold) {
  std::vector<BuildNode> pool(1);
  for (const auto& [key, id] : entries) {
    if (id <= threshold || id - threshold > kMaxOffset) {
      throw TrieBuildError(TrieBuildError::Kind::ThresholdTooLow,
                           "tree threshold too low: bucket " + std::to_string(id) + " is not within 15 of " +
                               std::to_string(threshold));
    }
    if (key.empty()) throw std::invalid_argument("trie keys must be non-empty");
    std::size_t at = 0;
    for (char ch : key) {
      const auto label = static_cast<std::uint8_t>(ch);
      auto it = pool[at].children.find(label);
      if (it == pool[at].children.end()) {
        if (pool.size() >= kMaxNodes) {
          throw TrieBuildError(TrieBuildError::Kind::TooManyNodes, "tree too large, raise the tree threshold");
        }
        pool[at].children.emplace(label, pool.size());
        at = pool.size();
        pool.emplace_back();
      } else {
        at = it->second;
      }
    }
    const std::uint32_t offset = id - threshold;
    if (pool[at].offset != 0 && pool[at].offset != offset) {
      throw std::invalid_argument("trie key '" + std::string(key) + "' mapped to two bucket ids");
    }
    pool[at].offset = offset;
  }

  // Breadth-first layout: index[pool id] = array slot.
  std::vector<std::uint32_t> slot(pool.size(), 0);
  std::vector<std::size_t> order;
  order.reserve(pool.size());
  order.push_back(0);
  for (std::size_t head = 0; head < order.size(); ++head) {
    for (const auto& [label, child] : pool[order[head]].children) {
      slot[child] = static_cast<std::uint32_t>(order.size());
      order.push_back(child);
    }
  }

  std::vector<std::uint32_t> nodes(pool.size(), 0);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const BuildNode& node = pool[order[i]];
    const std::uint32_t child = node.children.empty() ? 0 : slot[node.children.begin()->second];
    nodes[i] = pack(0, node.offset, child, false);
  }
  // Label and last-sibling flag are properties of the child's own word.
  for (std::size_t i = 0; i < order.size(); ++i) {
    const BuildNode& node = pool[order[i]];
    std::size_t left = node.children.size();
    for (const auto& [label, c] : node.children) {
      --left;
      std::uint32_t& word = nodes[slot[c]];
      word = pack(label, id_offset(word), first_child(word), left == 0);
    }
  }
  return CompactTrie(std::move(nodes), threshold);
}

std::optional<std::uint32_t> CompactTrie::lookup(std::string_view key) const noexcept {
  if (key.empty() || nodes_.empty()) return std::nullopt;
  std::uint32_t at = 0;
  for (char ch : key) {
    std::uint32_t child = first_child(nodes_[at]);
    if (child == 0) return std::nullopt;
    const auto label_byte = static_cast<std::uint8_t>(ch);
    for (;;) {
      const std::uint32_t word = nodes_[child];
      if (label(word) == label_byte) break;
      if (is_last(word)) return std::nullopt;
      ++child;
    }
    at = child;
  }
  const std::uint32_t offset = id_offset(nodes_[at]);
  if (offset == 0) return std::nullopt;
  return threshold_ + offset;
}

void CompactTrie::serialize(detail::ByteWriter& out) const {
  out.put<std::uint16_t>(static_cast<std::uint16_t>(nodes_.size()));
  for (auto w : nodes_) out.put<std::uint32_t>(w);
}

CompactTrie CompactTrie::deserialize(detail::ByteReader& in, std::uint32_t threshold) {
  const auto count = in.get<std::uint16_t>();
  in.need(static_cast<std::size_t>(count) * 4);
  std::vector<std::uint32_t> nodes(count);
  for (auto& w : nodes) w = in.get<std::uint32_t>();
  for (auto w : nodes) {
    if (first_child(w) >= count && first_child(w) != 0) {
      throw ModelFormatError(ModelFormatError::Kind::Truncated, "trie child index out of range");
    }
  }
  return CompactTrie(std::move(nodes), threshold);
}

}  // namespace likecard
