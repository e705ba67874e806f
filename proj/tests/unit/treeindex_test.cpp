#include <gtest/gtest.h>

#include <map>
#include <random>
#include <string>

#include "likecard/hash.hpp"
#include "likecard/treeindex.hpp"

using namespace likecard;

namespace {

CompactTrie round_trip(const CompactTrie& t) {
  detail::ByteWriter w;
  t.serialize(w);
  detail::ByteReader r(w.bytes());
  auto back = CompactTrie::deserialize(r, t.threshold());
  EXPECT_EQ(r.remaining(), 0u);
  return back;
}

}  // namespace

TEST(CompactTrie, EmptyHasOnlyRoot) {
  const auto t = CompactTrie::build({}, 5);
  EXPECT_EQ(t.node_count(), 1u);
  EXPECT_FALSE(t.lookup("a"));
  EXPECT_FALSE(t.lookup(""));
}

TEST(CompactTrie, SiblingKeys) {
  const auto t = CompactTrie::build({{"ab", 9}, {"ac", 10}}, 7);
  EXPECT_EQ(t.lookup("ab"), 9u);
  EXPECT_EQ(t.lookup("ac"), 10u);
  EXPECT_FALSE(t.lookup("ad"));
  EXPECT_FALSE(t.lookup("a"));
  EXPECT_FALSE(t.lookup("abc"));
  EXPECT_EQ(t.node_count(), 4u);  // root, a, b, c
}

TEST(CompactTrie, KeyThatPrefixesAnother) {
  const auto t = CompactTrie::build({{"a", 9}, {"ab", 10}}, 8);
  EXPECT_EQ(t.lookup("a"), 9u);
  EXPECT_EQ(t.lookup("ab"), 10u);
  const auto& nodes = t.nodes();
  const auto root_child = CompactTrie::first_child(nodes[0]);
  const auto a = nodes[root_child];
  EXPECT_EQ(CompactTrie::label(a), 'a');
  EXPECT_EQ(CompactTrie::id_offset(a), 1u);
  EXPECT_NE(CompactTrie::first_child(a), 0u);
  EXPECT_TRUE(CompactTrie::is_last(a));
}

TEST(CompactTrie, LayoutInvariants) {
  const auto t = CompactTrie::build({{"abc", 3}, {"abd", 4}, {"b", 5}, {"ba", 6}, {"c", 3}}, 2);
  const auto& nodes = t.nodes();
  // Breadth-first: every first-child index points forward, and each sibling
  // run ends with the last flag.
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto child = CompactTrie::first_child(nodes[i]);
    if (child == 0) continue;
    EXPECT_GT(child, i);
    std::size_t j = child;
    while (!CompactTrie::is_last(nodes[j])) {
      ASSERT_LT(j + 1, nodes.size());
      EXPECT_LT(CompactTrie::label(nodes[j]), CompactTrie::label(nodes[j + 1]));
      ++j;
    }
  }
  for (auto n : nodes) EXPECT_EQ(n >> 29, 0u);
}

TEST(CompactTrie, RejectsOutOfRangeIds) {
  try {
    (void)CompactTrie::build({{"a", 7}}, 7);
    FAIL();
  } catch (const TrieBuildError& e) {
    EXPECT_EQ(e.kind(), TrieBuildError::Kind::ThresholdTooLow);
  }
  EXPECT_THROW((void)CompactTrie::build({{"a", 23}}, 7), TrieBuildError);
  EXPECT_NO_THROW((void)CompactTrie::build({{"a", 22}}, 7));
}

TEST(CompactTrie, NodeCapEnforced) {
  // 3 bytes over 41 symbols: 41 + 41^2 + 41^3 nodes, far past 65535.
  std::vector<std::string> keys;
  for (int a = 0; a < 41; ++a)
    for (int b = 0; b < 41; ++b)
      for (int c = 0; c < 41; ++c) keys.push_back({char('0' + a), char('0' + b), char('0' + c)});
  std::vector<CompactTrie::Entry> entries;
  for (const auto& k : keys) entries.emplace_back(k, 3);
  try {
    (void)CompactTrie::build(entries, 2);
    FAIL();
  } catch (const TrieBuildError& e) {
    EXPECT_EQ(e.kind(), TrieBuildError::Kind::TooManyNodes);
  }
}

TEST(CompactTrie, RandomRoundTripAndFuzzMisses) {
  std::mt19937_64 rng(21);
  std::map<std::string, std::uint32_t> truth;
  while (truth.size() < 3000) {
    std::string k;
    const auto len = 1 + uniform_below(rng, 8);
    for (std::uint64_t i = 0; i < len; ++i) k.push_back(static_cast<char>('a' + uniform_below(rng, 6)));
    truth[k] = 11 + static_cast<std::uint32_t>(uniform_below(rng, 15));
  }
  std::vector<CompactTrie::Entry> entries(truth.begin(), truth.end());
  const auto t = CompactTrie::build(entries, 10);
  const auto back = round_trip(t);
  EXPECT_EQ(back.nodes(), t.nodes());

  detail::ByteWriter w;
  t.serialize(w);
  EXPECT_EQ(w.bytes().size(), 2 + 4 * t.node_count());
  EXPECT_EQ(t.serialized_bytes(), 2 + 4 * t.node_count());

  for (const auto& [k, id] : truth) EXPECT_EQ(back.lookup(k), id) << k;
  for (int i = 0; i < 20000; ++i) {
    std::string k;
    const auto len = 1 + uniform_below(rng, 10);
    for (std::uint64_t j = 0; j < len; ++j) k.push_back(static_cast<char>('a' + uniform_below(rng, 8)));
    const auto it = truth.find(k);
    if (it == truth.end()) {
      EXPECT_FALSE(back.lookup(k)) << k;
    } else {
      EXPECT_EQ(back.lookup(k), it->second);
    }
  }
}

TEST(CompactTrie, DeserializeRejectsBadChildIndex) {
  detail::ByteWriter w;
  w.put<std::uint16_t>(2);
  w.put<std::uint32_t>(CompactTrie::pack(0, 0, 1, true));
  w.put<std::uint32_t>(CompactTrie::pack('a', 0, 7, true));
  detail::ByteReader r(w.bytes());
  EXPECT_THROW((void)CompactTrie::deserialize(r, 3), ModelFormatError);
}
