#include "likecard/groundtruth.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "likecard/hash.hpp"

namespace likecard {

PatternCatalog::PatternCatalog(PatternKind kind, std::uint32_t max_len, std::uint64_t dataset_size, Map entries)
    : kind_(kind), max_len_(max_len), dataset_size_(dataset_size), entries_(std::move(entries)) {
  for (const auto& [key, card] : entries_) max_card_ = std::max(max_card_, card);
}

std::optional<std::uint64_t> PatternCatalog::find(std::string_view canonical) const {
  auto it = entries_.find(canonical);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string_view> PatternCatalog::sorted_keys() const {
  std::vector<std::string_view> keys;
  keys.reserve(entries_.size());
  for (const auto& [key, card] : entries_) keys.emplace_back(key);
  std::sort(keys.begin(), keys.end());
  return keys;
}

namespace {

void bump(PatternCatalog::Map& counts, std::string_view key) {
  auto it = counts.find(key);
  if (it != counts.end()) {
    ++it->second;
  } else {
    counts.emplace(std::string(key), 1);
  }
}

}  // namespace

PatternCatalog enumerate(const std::vector<std::string>& dataset, PatternKind kind, std::uint32_t max_len) {
  if (dataset.empty()) throw std::invalid_argument("cannot enumerate patterns of an empty dataset");
  if (max_len < 1) throw std::invalid_argument("max_len must be at least 1");

  PatternCatalog::Map counts;
  std::vector<std::string_view> seen;
  std::string reversed;

  for (const auto& row : dataset) {
    std::string_view s = row;
    if (kind == PatternKind::Suffix) {
      reversed.assign(row.rbegin(), row.rend());
      s = reversed;
    }
    if (kind != PatternKind::Substring) {
      const std::size_t top = std::min<std::size_t>(max_len, s.size());
      for (std::size_t len = 1; len <= top; ++len) bump(counts, s.substr(0, len));
      continue;
    }
    seen.clear();
    for (std::size_t start = 0; start < s.size(); ++start) {
      const std::size_t top = std::min<std::size_t>(max_len, s.size() - start);
      for (std::size_t len = 1; len <= top; ++len) seen.push_back(s.substr(start, len));
    }
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    for (auto key : seen) bump(counts, key);
  }
  return PatternCatalog(kind, max_len, dataset.size(), std::move(counts));
}

std::uint64_t exact_cardinality(const std::vector<std::string>& dataset, const Query& query) {
  std::uint64_t count = 0;
  const std::string_view body = query.body;
  for (const auto& row : dataset) {
    const std::string_view s = row;
    bool hit = false;
    switch (query.kind) {
      case PatternKind::Prefix:
        hit = s.starts_with(body);
        break;
      case PatternKind::Suffix:
        hit = s.ends_with(body);
        break;
      case PatternKind::Substring:
        hit = s.find(body) != std::string_view::npos;
        break;
    }
    count += hit ? 1 : 0;
  }
  return count;
}

std::string dataset_alphabet(const std::vector<std::string>& dataset) {
  std::array<bool, 256> present{};
  for (const auto& row : dataset) {
    for (unsigned char c : row) present[c] = true;
  }
  std::string out;
  for (int c = 0; c < 256; ++c) {
    if (present[static_cast<std::size_t>(c)]) out.push_back(static_cast<char>(c));
  }
  return out;
}

Workload gen_workload(const PatternCatalog& catalog, const std::vector<std::string>& dataset, std::size_t n_pos,
                      std::size_t n_neg, std::size_t max_extra, std::uint64_t seed) {
  if (catalog.empty()) throw std::invalid_argument("cannot sample a workload from an empty catalog");
  std::mt19937_64 rng(seed);
  Workload workload;
  const PatternKind kind = catalog.kind();
  auto keys = catalog.sorted_keys();

  // Partial Fisher-Yates: the first `take` slots become a uniform sample.
  const std::size_t take = std::min(n_pos, keys.size());
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + uniform_below(rng, keys.size() - i);
    std::swap(keys[i], keys[j]);
    workload.entries.push_back({Query{kind, raw_body(kind, keys[i])}, *catalog.find(keys[i])});
  }

  if (n_neg == 0) return workload;
  if (max_extra == 0) throw std::invalid_argument("max_extra must be positive to build empty-answer queries");

  std::vector<std::string_view> bases;
  for (auto key : keys) {
    if (key.size() < catalog.max_len()) bases.push_back(key);
  }
  std::sort(bases.begin(), bases.end());
  const std::string alphabet = dataset_alphabet(dataset);
  if (bases.empty() || alphabet.empty()) {
    throw std::runtime_error("no catalog pattern is short enough to extend into an empty-answer query");
  }

  const std::size_t budget = 10 * n_neg;
  std::size_t found = 0;
  for (std::size_t attempt = 0; attempt < budget && found < n_neg; ++attempt) {
    const auto base = bases[uniform_below(rng, bases.size())];
    const std::size_t room = std::min<std::size_t>(max_extra, catalog.max_len() - base.size());
    const std::size_t extra = 1 + uniform_below(rng, room);
    std::string canonical(base);
    for (std::size_t i = 0; i < extra; ++i) canonical.push_back(alphabet[uniform_below(rng, alphabet.size())]);
    // Within max_len the catalog is exhaustive, so absence means an empty answer.
    if (catalog.find(canonical)) continue;
    workload.entries.push_back({Query{kind, raw_body(kind, canonical)}, 0});
    ++found;
  }
  if (found < n_neg) {
    throw std::runtime_error("found only " + std::to_string(found) + " of " + std::to_string(n_neg) +
                             " empty-answer queries in " + std::to_string(budget) +
                             " attempts; the alphabet is too small to produce empty patterns");
  }
  return workload;
}

std::vector<std::string> parse_dataset(std::istream& in) {
  std::vector<std::string> rows;
  std::string line;
  while (std::getline(in, line)) rows.push_back(line);
  return rows;
}

std::vector<std::string> read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dataset '" + path + "'");
  return parse_dataset(in);
}

std::string escape_bytes(std::string_view raw) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(raw.size());
  for (char ch : raw) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 0x20 || c == 0x7F || c == '\\') {
      out += "\\x";
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    } else {
      out.push_back(ch);
    }
  }
  return out;
}

std::string unescape_bytes(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '\\') {
      out.push_back(text[i]);
      continue;
    }
    if (text.size() - i < 4) {
      throw std::invalid_argument("dangling escape in '" + std::string(text) + "'");
    }
    if (text[i + 1] != 'x') throw std::invalid_argument("unknown escape in '" + std::string(text) + "'");
    unsigned value = 0;
    auto [ptr, ec] = std::from_chars(text.data() + i + 2, text.data() + i + 4, value, 16);
    if (ec != std::errc{} || ptr != text.data() + i + 4) {
      throw std::invalid_argument("bad \\x escape in '" + std::string(text) + "'");
    }
    out.push_back(static_cast<char>(value));
    i += 3;
  }
  return out;
}

void write_workload(std::ostream& out, const Workload& workload) {
  for (const auto& e : workload.entries) {
    out << to_string(e.query.kind) << '\t' << escape_bytes(e.query.body) << '\t' << e.cardinality << '\n';
  }
}

void write_workload(const std::string& path, const Workload& workload) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write workload '" + path + "'");
  write_workload(out, workload);
}

Workload read_workload(std::istream& in) {
  Workload workload;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) {
      throw std::invalid_argument("workload line " + std::to_string(lineno) + ": expected 3 tab-separated fields");
    }
    WorkloadEntry e;
    e.query.kind = parse_kind(std::string_view(line).substr(0, t1));
    e.query.body = unescape_bytes(std::string_view(line).substr(t1 + 1, t2 - t1 - 1));
    if (e.query.body.empty()) {
      throw std::invalid_argument("workload line " + std::to_string(lineno) + ": empty pattern body");
    }
    const std::string_view card = std::string_view(line).substr(t2 + 1);
    auto [ptr, ec] = std::from_chars(card.data(), card.data() + card.size(), e.cardinality);
    if (ec != std::errc{} || ptr != card.data() + card.size()) {
      throw std::invalid_argument("workload line " + std::to_string(lineno) + ": bad cardinality");
    }
    workload.entries.push_back(std::move(e));
  }
  return workload;
}

Workload read_workload(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open workload '" + path + "'");
  return read_workload(in);
}

}  // namespace likecard
