// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "likecard/bloom.hpp"
#include "likecard/errors.hpp"
#include "likecard/estimator.hpp"
#include "likecard/evaluation.hpp"
#include "likecard/hash.hpp"
#include "likecard/probmodel.hpp"

using namespace likecard;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kEb = 1.5;
constexpr std::uint32_t kL = 10;
constexpr std::uint64_t kSeed = 20240611;

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const Outcome& o) {
  std::printf("criterion %2d  %-28s %s  %s\n", id, name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const std::vector<std::string>& desk() {
  static const auto rows = read_dataset(std::string(LIKECARD_TEST_DATA) + "/web2_30k.txt");
  return rows;
}

Config desk_config() {
  Config c;
  c.eb = kEb;
  c.max_len = kL;
  return c;
}

std::string key(std::uint64_t salt, std::uint64_t i) {
  return std::to_string(salt) + ":" + std::to_string(i) + ":" + std::to_string(hash64(std::to_string(i), salt));
}

// Built once per kind and shared by criteria 1, 2, 7, 9 and 10.
struct KindRun {
  PatternKind kind{};
  PatternCatalog catalog;
  EstimatorModel model;
  double build_seconds = 0.0;
};

std::vector<KindRun>& runs() {
  static std::vector<KindRun> all = [] {
    std::vector<KindRun> out;
    for (auto kind : {PatternKind::Prefix, PatternKind::Suffix, PatternKind::Substring}) {
      const auto t0 = Clock::now();
      auto catalog = enumerate(desk(), kind, kL);
      auto model = EstimatorModel::build(catalog, desk_config(), kSeed);
      const double secs = seconds_since(t0);
      out.push_back({kind, std::move(catalog), std::move(model), secs});
    }
    return out;
  }();
  return all;
}

Outcome error_bound() {
  Outcome o;
  for (auto& run : runs()) {
    const auto t0 = Clock::now();
    double worst = 1.0;
    std::size_t violations = 0;
    for (const auto& [body, card] : run.catalog.entries()) {
      const double q = q_error(run.model.estimate_canonical(body), static_cast<double>(card));
      worst = std::max(worst, q);
      violations += q > kEb * (1 + 1e-12);
    }
    const double total = run.build_seconds + seconds_since(t0);
    o.pass = o.pass && violations == 0 && total < 300.0;
    o.detail += fmt("%s: %zu patterns max %.4f violations %zu %.1fs; ", std::string(to_string(run.kind)).c_str(),
                    run.catalog.size(), worst, violations, total);
  }
  return o;
}

Outcome frontier_equivalence() {
  Outcome o;
  for (auto& run : runs()) {
    Config full = desk_config();
    full.use_frontier = false;
    const auto plain = EstimatorModel::build(run.catalog, full, kSeed);
    std::size_t mismatches = 0;
    for (const auto& [body, card] : run.catalog.entries()) {
      mismatches += run.model.classify_with_prefix_walk(body) != plain.classify_with_prefix_walk(body);
    }
    const double a = static_cast<double>(run.model.serialize().size());
    const double b = static_cast<double>(plain.serialize().size());
    const double drop = 1.0 - a / b;
    o.pass = o.pass && mismatches == 0 && drop >= 0.10;
    o.detail += fmt("%s: mismatches %zu size %.0f vs %.0f (-%.1f%%); ", std::string(to_string(run.kind)).c_str(),
                    mismatches, a, b, 100 * drop);
  }
  return o;
}

Outcome empty_answer_bound() {
  Outcome o;
  constexpr double kTarget = 0.9;
  constexpr std::size_t kQueries = 20000;
  for (auto& run : runs()) {
    Config c = desk_config();
    c.p_n = kTarget;
    const auto model = EstimatorModel::build(run.catalog, c, kSeed);
    const auto w = gen_workload(run.catalog, desk(), 0, kQueries, 3, kSeed + 3);
    std::size_t walk = 0;
    std::size_t direct = 0;
    for (const auto& e : w.entries) {
      const auto body = canonical_body(e.query);
      walk += model.classify_with_prefix_walk(body) == 1;
      direct += model.classify_direct(body) == 1;
    }
    const double n = static_cast<double>(w.entries.size());
    const double sigma = std::sqrt(kTarget * (1 - kTarget) / n);
    const double walk_rate = walk / n;
    const double direct_rate = direct / n;
    o.pass = o.pass && n >= 1e4 && walk_rate >= kTarget - 3 * sigma && walk_rate > direct_rate;
    o.detail += fmt("%s: walk %.4f direct %.4f (floor %.4f); ", std::string(to_string(run.kind)).c_str(),
                    walk_rate, direct_rate, kTarget - 3 * sigma);
  }
  return o;
}

// One empty-answer key against one bucket's cascade, each Bloom layer firing
// independently with probability f.
bool cascade_accepts(std::mt19937_64& rng, double f, std::uint32_t m) {
  for (std::uint32_t layer = 1; layer < m; ++layer) {
    if (uniform_unit(rng) >= f) return layer % 2 == 0;
  }
  return m % 2 == 0;
}

// Bucket id of one prefix: every bucket 2..n runs its cascade, ties among
// accepting buckets break uniformly, no acceptance means bucket 1.
std::uint32_t simulate_prefix(std::mt19937_64& rng, double f, std::uint32_t m, std::uint32_t n) {
  std::uint32_t chosen = 1;
  std::uint32_t accepted = 0;
  for (std::uint32_t id = 2; id <= n; ++id) {
    if (cascade_accepts(rng, f, m) && uniform_below(rng, ++accepted) == 0) chosen = id;
  }
  return chosen;
}

std::uint64_t brute_nondecreasing(std::uint32_t t, std::uint32_t n) {
  std::uint64_t count = 0;
  std::function<void(std::uint32_t, std::uint32_t)> rec = [&](std::uint32_t depth, std::uint32_t lo) {
    if (depth == t) {
      ++count;
      return;
    }
    for (std::uint32_t v = lo; v <= n; ++v) rec(depth + 1, v);
  };
  rec(0, 2);
  return count;
}

Outcome closed_forms() {
  Outcome o;
  constexpr int kTrials = 100000;
  std::mt19937_64 rng(kSeed);
  double worst_z = 0.0;
  int cells = 0;
  for (double f : {0.01, 0.05, 0.1}) {
    for (std::uint32_t m : {2u, 3u, 4u}) {
      int accepted = 0;
      for (int i = 0; i < kTrials; ++i) accepted += cascade_accepts(rng, f, m);
      const double p = prob::p_bucket(f, m);
      const double se = std::sqrt(p * (1 - p) / kTrials);
      worst_z = std::max(worst_z, std::abs(accepted / double(kTrials) - p) / se);
      ++cells;
      for (std::uint32_t n : {3u, 5u, 8u}) {
        for (std::uint32_t t : {2u, 3u, 5u}) {
          int hits = 0;
          std::vector<std::uint32_t> ids(t);
          for (int i = 0; i < kTrials; ++i) {
            for (auto& id : ids) id = simulate_prefix(rng, f, m, n);
            hits += walk_decision(ids) == 1;
          }
          const double pw = prob::p_b1_prefix_walk(prob::p_fallthrough_naive(f, m, n), t, n);
          const double sew = std::sqrt(pw * (1 - pw) / kTrials);
          worst_z = std::max(worst_z, std::abs(hits / double(kTrials) - pw) / sew);
          ++cells;
        }
      }
    }
  }
  std::size_t count_mismatches = 0;
  for (std::uint32_t n = 2; n <= 6; ++n) {
    for (std::uint32_t t = 1; t <= 6; ++t) {
      count_mismatches += static_cast<std::uint64_t>(std::llround(prob::choose(n + t - 2, t))) !=
                          brute_nondecreasing(t, n);
    }
  }
  o.pass = worst_z <= 3.0 && count_mismatches == 0;
  o.detail = fmt("%d cells, worst |z| %.2f; stars-and-bars mismatches %zu", cells, worst_z, count_mismatches);
  return o;
}

Outcome storage_model() {
  Outcome o;
  struct Case {
    std::uint64_t n_pos, n_neg;
    std::uint32_t len, m;
    double f;
  };
  const std::vector<Case> cases = {
      {2000, 20000, 10, 2, 0.05},    {2000, 20000, 10, 3, 0.05},    {5000, 5000, 8, 2, 0.1},
      {5000, 5000, 8, 4, 0.1},       {10000, 100000, 12, 3, 0.01},  {10000, 100000, 12, 5, 0.02},
      {3000, 300000, 10, 4, 0.005},  {3000, 300000, 10, 6, 0.02},   {20000, 2000, 6, 2, 0.2},
      {20000, 2000, 6, 3, 0.3},      {1000, 50000, 16, 3, 0.01},    {1000, 50000, 16, 7, 0.05},
      {8000, 80000, 10, 2, 0.001},   {8000, 80000, 10, 8, 0.1},     {4000, 400000, 8, 5, 0.01},
      {4000, 40000, 14, 4, 0.03},    {50000, 50000, 10, 3, 0.02},   {50000, 500000, 10, 4, 0.01},
      {12000, 1200, 12, 2, 0.4},     {6000, 60000, 9, 6, 0.15},     {2500, 250000, 11, 3, 0.002},
      {30000, 3000, 10, 5, 0.25}};
  double worst_rel = 0.0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    auto make_keys = [&](std::uint64_t count, char tag) {
      std::vector<std::string> keys;
      keys.reserve(count);
      for (std::uint64_t k = 0; k < count; ++k) {
        std::string s = tag + std::to_string(k);
        s.resize(c.len, '.');  // fixed length L
        keys.push_back(std::move(s));
      }
      return keys;
    };
    const auto pos = make_keys(c.n_pos, 'p');
    const auto neg = make_keys(c.n_neg, 'n');
    const std::vector<std::string_view> pv(pos.begin(), pos.end());
    const std::vector<std::string_view> nv(neg.begin(), neg.end());
    const auto filter = LayeredFilter::build(2, pv, nv, c.m, c.f, derive_seed(kSeed, i));
    const BucketStats stats{2, c.n_pos, c.n_neg, c.len};
    const double predicted = storage_cost_for_layers(c.m, c.f, stats);
    const double actual = 8.0 * static_cast<double>(filter.serialized_bytes());
    worst_rel = std::max(worst_rel, std::abs(predicted - actual) / actual);
  }

  double worst_gap = 0.0;
  const auto layers = default_layer_candidates();
  for (const auto& c : cases) {
    const BucketStats stats{2, c.n_pos, c.n_neg, c.len};
    for (std::uint32_t m : layers) {
      const std::uint32_t only[] = {m};
      const auto plan = optimize_bucket(stats, only);
      double grid = storage_cost_for_layers(m, kMinFalsePositive, stats);
      for (double f = kMinFalsePositive; f <= kMaxFalsePositive; f += 1e-4) {
        grid = std::min(grid, storage_cost_for_layers(m, f, stats));
      }
      worst_gap = std::max(worst_gap, plan.predicted_bits / grid - 1.0);
    }
  }
  o.pass = cases.size() >= 20 && worst_rel <= 0.25 && worst_gap <= 0.01;
  o.detail = fmt("%zu cases, worst prediction error %.1f%%, worst optimizer gap %.3f%%", cases.size(),
                 100 * worst_rel, 100 * worst_gap);
  return o;
}

Outcome bloom_calibration() {
  Outcome o;
  constexpr std::uint64_t kCap = 50000;
  constexpr std::uint64_t kProbes = 200000;
  for (double f : {0.01, 0.05}) {
    auto b = BloomFilter::make(kCap, f, derive_seed(kSeed, static_cast<std::uint64_t>(f * 1000)));
    for (std::uint64_t i = 0; i < kCap; ++i) b.insert(key(1, i));
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < kProbes; ++i) hits += b.contains(key(2, i));
    const double fpr = static_cast<double>(hits) / kProbes;
    o.pass = o.pass && fpr >= f / 2 && fpr <= 2 * f;
    o.detail += fmt("f=%.2f fpr %.4f; ", f, fpr);
  }
  std::mt19937_64 rng(kSeed);
  std::uint64_t trials = 0;
  std::uint64_t misses = 0;
  for (int round = 0; trials < 1000000; ++round) {
    const auto n = 1 + uniform_below(rng, 20000);
    const double f = 0.001 + 0.4 * uniform_unit(rng);
    auto b = BloomFilter::make(n, f, rng());
    std::vector<std::string> keys;
    for (std::uint64_t i = 0; i < n; ++i) {
      std::string k(1 + uniform_below(rng, 12), '\0');
      for (auto& ch : k) ch = static_cast<char>(uniform_below(rng, 256));
      b.insert(k);
      keys.push_back(std::move(k));
    }
    for (const auto& k : keys) misses += !b.contains(k);
    trials += n;
  }
  o.pass = o.pass && misses == 0;
  o.detail += fmt("false negatives %llu over %llu trials", static_cast<unsigned long long>(misses),
                  static_cast<unsigned long long>(trials));
  return o;
}

// Exact Markov product on true counts, clamped and floored like the model.
double exact_markov(std::string_view canonical, const PatternCatalog& base, const PatternCatalog& windows,
                    double floor) {
  std::vector<WindowRatio> ratios;
  for (std::size_t end = kL + 1; end <= canonical.size(); ++end) {
    const auto w = canonical.substr(end - kL, kL);
    ratios.push_back({static_cast<double>(*windows.find(w)), static_cast<double>(*windows.find(w.substr(0, kL - 1)))});
  }
  return compose_markov(static_cast<double>(*base.find(canonical.substr(0, kL))), ratios, floor);
}

Outcome markov_bound() {
  Outcome o;
  const auto& rows = desk();
  const auto reversed = reverse_each(rows);
  const auto& substring = runs()[2];
  const auto reversed_substrings = enumerate(reversed, PatternKind::Substring, kL);
  std::mt19937_64 rng(kSeed + 7);

  std::size_t checked = 0;
  std::size_t violations = 0;
  std::size_t boundary_mismatches = 0;
  double worst_log_ratio = 0.0;  // |log_eb ratio| minus the allowed exponent
  for (auto kind : {PatternKind::Prefix, PatternKind::Suffix, PatternKind::Substring}) {
    Config c = desk_config();
    c.long_queries = true;
    const auto& run = runs()[static_cast<std::size_t>(kind)];
    const EstimatorModel* model = &run.model;
    std::optional<EstimatorModel> with_companion;
    if (kind != PatternKind::Substring) {
      with_companion = EstimatorModel::build(rows, kind, c, kSeed);
      model = &*with_companion;
    }
    const auto& windows = kind == PatternKind::Suffix ? reversed_substrings : substring.catalog;
    const auto& canon_rows = kind == PatternKind::Suffix ? reversed : rows;

    std::unordered_set<std::string> seen;
    for (int attempt = 0; attempt < 200000 && seen.size() < 3000; ++attempt) {
      const auto& row = canon_rows[uniform_below(rng, canon_rows.size())];
      const auto len = kL + 1 + uniform_below(rng, 3);
      if (row.size() < len) continue;
      const auto start = kind == PatternKind::Substring ? uniform_below(rng, row.size() - len + 1) : 0;
      seen.insert(row.substr(start, len));
    }
    for (const auto& canonical : seen) {
      const double est = model->estimate_canonical(canonical);
      const double exact = exact_markov(canonical, run.catalog, windows, run.model.scheme().bucket(1).est);
      const double allowed = 1.0 + 2.0 * static_cast<double>(canonical.size() - kL);
      const double log_ratio = std::abs(std::log(est / exact) / std::log(kEb));
      worst_log_ratio = std::max(worst_log_ratio, log_ratio - allowed);
      violations += log_ratio > allowed + 1e-9;
      ++checked;
    }
    for (const auto& [body, card] : run.catalog.entries()) {
      if (body.size() != kL) continue;
      const Query q{kind, raw_body(kind, body)};
      boundary_mismatches += model->markov_estimate(q) != model->estimate(q);
    }
  }
  o.pass = checked > 0 && violations == 0 && boundary_mismatches == 0;
  o.detail = fmt("%zu long queries, violations %zu (worst margin %.2f), |Q|=L mismatches %zu", checked, violations,
                 worst_log_ratio, boundary_mismatches);
  return o;
}

Outcome trie_exactness() {
  Outcome o;
  std::mt19937_64 rng(kSeed + 8);
  std::size_t wrong = 0;
  std::size_t fuzz_hits = 0;
  std::size_t size_errors = 0;
  std::size_t keys_checked = 0;
  for (int round = 0; round < 20; ++round) {
    const std::uint32_t threshold = 2 + static_cast<std::uint32_t>(uniform_below(rng, 40));
    const auto alphabet = 2 + uniform_below(rng, 20);
    std::map<std::string, std::uint32_t> truth;
    const auto target = 1 + uniform_below(rng, 4000);
    for (std::uint64_t i = 0; i < target * 3 && truth.size() < target; ++i) {
      std::string k(1 + uniform_below(rng, 10), '\0');
      for (auto& ch : k) ch = static_cast<char>('a' + uniform_below(rng, alphabet));
      truth[k] = threshold + 1 + static_cast<std::uint32_t>(uniform_below(rng, CompactTrie::kMaxOffset));
    }
    std::vector<CompactTrie::Entry> entries(truth.begin(), truth.end());
    std::optional<CompactTrie> trie;
    try {
      trie = CompactTrie::build(entries, threshold);
    } catch (const TrieBuildError&) {
      continue;  // node cap; covered by unit tests
    }
    detail::ByteWriter w;
    trie->serialize(w);
    size_errors += w.bytes().size() != 2 + 4 * trie->node_count();
    detail::ByteReader r(w.bytes());
    const auto back = CompactTrie::deserialize(r, threshold);
    for (const auto& [k, id] : truth) {
      wrong += back.lookup(k) != std::optional<std::uint32_t>(id);
      ++keys_checked;
    }
    for (int i = 0; i < 20000; ++i) {
      std::string k(1 + uniform_below(rng, 12), '\0');
      for (auto& ch : k) ch = static_cast<char>('a' + uniform_below(rng, alphabet + 2));
      if (!truth.contains(k)) fuzz_hits += back.lookup(k).has_value();
    }
  }
  // The desk model's own trie, when present, answers every key above τ.
  const auto& sub = runs()[2];
  if (const auto& trie = sub.model.trie()) {
    for (const auto& [body, card] : sub.catalog.entries()) {
      const auto id = sub.model.scheme().bucket_of(card);
      if (id > sub.model.threshold()) {
        wrong += trie->lookup(body) != std::optional<std::uint32_t>(id);
        ++keys_checked;
      }
    }
  }
  o.pass = keys_checked > 0 && wrong == 0 && fuzz_hits == 0 && size_errors == 0;
  o.detail = fmt("%zu keys, wrong %zu, fuzz hits %zu, size mismatches %zu", keys_checked, wrong, fuzz_hits,
                 size_errors);
  return o;
}

Outcome serialization() {
  Outcome o;
  const auto& run = runs()[2];
  const auto path = (std::filesystem::temp_directory_path() / "likecard_acceptance.lrnt").string();
  run.model.save(path);
  const auto back = EstimatorModel::load(path);
  std::filesystem::remove(path);
  const auto w = gen_workload(run.catalog, desk(), 8000, 2000, 3, kSeed + 9);
  std::size_t diffs = 0;
  for (const auto& e : w.entries) {
    const double a = run.model.estimate(e.query);
    const double b = back.estimate(e.query);
    diffs += std::memcmp(&a, &b, sizeof a) != 0;
  }

  const auto good = run.model.serialize();
  auto kind_of = [](const std::string& bytes) {
    try {
      (void)EstimatorModel::deserialize(bytes);
    } catch (const ModelFormatError& e) {
      return static_cast<int>(e.kind());
    }
    return -1;
  };
  auto magic = good;
  magic[0] = 'X';
  auto version = good;
  version[4] = static_cast<char>(kModelFormatVersion + 1);
  auto flipped = good;
  flipped[good.size() / 2] ^= 0x04;
  const int got[] = {kind_of(magic), kind_of(version), kind_of(good.substr(0, good.size() - 3)), kind_of(flipped)};
  const int want[] = {static_cast<int>(ModelFormatError::Kind::NotAModel),
                      static_cast<int>(ModelFormatError::Kind::UnsupportedVersion),
                      static_cast<int>(ModelFormatError::Kind::Truncated),
                      static_cast<int>(ModelFormatError::Kind::ChecksumMismatch)};
  const bool errors_ok = std::equal(std::begin(got), std::end(got), std::begin(want));
  o.pass = w.entries.size() >= 10000 && diffs == 0 && errors_ok && kind_of(good) == -1;
  o.detail = fmt("%zu queries, differing %zu; corruption kinds %s", w.entries.size(), diffs,
                 errors_ok ? "distinct and as specified" : "WRONG");
  return o;
}

Outcome latency() {
  Outcome o;
  for (auto& run : runs()) {
    const auto w = gen_workload(run.catalog, desk(), 8000, 2000, 3, kSeed + 10);
    const auto report = evaluate(run.model, w, run.model.serialize().size());
    o.pass = o.pass && report.mean_latency_us < 1000.0;
    o.detail += fmt("%s %.2f us; ", std::string(to_string(run.kind)).c_str(), report.mean_latency_us);
  }
  return o;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"error bound sweep", error_bound},
      {"frontier equivalence", frontier_equivalence},
      {"empty-answer bound", empty_answer_bound},
      {"closed forms (Monte-Carlo)", closed_forms},
      {"storage model", storage_model},
      {"bloom calibration", bloom_calibration},
      {"markov bound", markov_bound},
      {"trie exactness and format", trie_exactness},
      {"serialization", serialization},
      {"latency", latency},
  };
  int id = 0;
  for (const auto& [name, fn] : criteria) {
    ++id;
    try {
      report(id, name, fn());
    } catch (const std::exception& e) {
      report(id, name, {false, std::string("threw: ") + e.what()});
    }
  }
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
