#include "likecard/estimator.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "likecard/errors.hpp"
#include "likecard/hash.hpp"

namespace likecard {
namespace {

constexpr std::uint64_t kChecksumSeed = 0x4c524e54636b736dULL;
constexpr std::uint64_t kCompanionSeedIndex = 0xc0c0;

using FormatKind = ModelFormatError::Kind;

[[noreturn]] void corrupt(const std::string& what) {
  throw ModelFormatError(FormatKind::ChecksumMismatch, "corrupt model: " + what);
}

}  // namespace

std::uint32_t walk_decision(std::span<const std::uint32_t> ids) {
  if (ids.empty()) throw std::invalid_argument("prefix walk needs at least one bucket id");
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (ids[k] == 1) return 1;
    if (k > 0 && ids[k] < ids[k - 1]) return 1;
  }
  return ids[0];
}

double compose_markov(double base, std::span<const WindowRatio> ratios, double floor) {
  double est = base;
  for (const auto& r : ratios) {
    if (!(r.denominator > 0.0)) throw std::invalid_argument("Markov ratio needs a positive denominator");
    est *= std::min(1.0, r.numerator / r.denominator);
  }
  return std::max(est, floor);
}

EstimatorModel EstimatorModel::build(const std::vector<std::string>& dataset, PatternKind kind,
                                     const Config& config, std::uint64_t seed) {
  config.validate();
  const auto catalog = enumerate(dataset, kind, config.max_len);
  auto model = build(catalog, config, seed);
  model.config_.long_queries = config.long_queries;
  if (config.long_queries && kind != PatternKind::Substring) {
    const auto rows = kind == PatternKind::Suffix ? reverse_each(dataset) : dataset;
    Config sub = config;
    sub.long_queries = false;
    sub.tree_threshold.reset();
    sub.p_n.reset();
    const auto sub_catalog = enumerate(rows, PatternKind::Substring, config.max_len);
    model.companion_ =
        std::make_shared<const EstimatorModel>(build(sub_catalog, sub, derive_seed(seed, kCompanionSeedIndex)));
  }
  return model;
}

EstimatorModel EstimatorModel::build(const PatternCatalog& catalog, const Config& config, std::uint64_t seed) {
  config.validate();
  if (catalog.empty()) throw std::invalid_argument("dataset yields no patterns");
  if (catalog.max_len() != config.max_len) throw std::invalid_argument("catalog max length differs from config");

  auto scheme = BucketScheme::make(config.eb, catalog.max_cardinality());
  if (scheme.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw std::invalid_argument("too many buckets for the model format");
  }
  const auto keys = bucketize(catalog, scheme);

  EstimatorModel model(config, catalog.kind(), std::move(scheme));
  model.config_.long_queries = false;
  model.dataset_size_ = catalog.dataset_size();
  model.master_seed_ = seed;
  model.plan_ = select_plan(keys, config);
  model.threshold_ = model.plan_.threshold;

  const std::uint32_t tau = model.threshold_;
  model.filters_.reserve(model.plan_.buckets.size());
  for (const auto& bp : model.plan_.buckets) {
    const auto negatives = collect_negatives(keys, bp.bucket_id, tau, config.use_frontier);
    model.filters_.push_back(LayeredFilter::build(bp.bucket_id, keys.keys(bp.bucket_id), negatives, bp.m, bp.f,
                                                  derive_seed(seed, bp.bucket_id)));
  }

  const std::uint32_t n = keys.bucket_count();
  if (tau < n) {
    std::vector<CompactTrie::Entry> entries;
    for (std::uint32_t id = tau + 1; id <= n; ++id) {
      for (auto key : keys.keys(id)) entries.emplace_back(key, id);
    }
    model.trie_ = CompactTrie::build(entries, tau);
  }
  return model;
}

std::uint32_t EstimatorModel::classify_direct(std::string_view canonical) const noexcept {
  return classify(filters_, trie_ ? &*trie_ : nullptr, canonical);
}

std::uint32_t EstimatorModel::classify_with_prefix_walk(std::string_view canonical) const {
  std::vector<std::uint32_t> ids;
  ids.reserve(canonical.size());
  for (std::size_t len = canonical.size(); len >= 1; --len) {
    const auto id = classify_direct(canonical.substr(0, len));
    ids.push_back(id);
    if (id == 1 || (ids.size() > 1 && id < ids[ids.size() - 2])) break;
  }
  return walk_decision(ids);
}

double EstimatorModel::short_estimate(std::string_view canonical, Routing routing) const {
  const auto id = routing == Routing::PrefixWalk ? classify_with_prefix_walk(canonical) : classify_direct(canonical);
  return scheme_.bucket(id).est;
}

double EstimatorModel::markov_canonical(std::string_view canonical, Routing routing) const {
  const std::size_t L = config_.max_len;
  const EstimatorModel* windows = kind_ == PatternKind::Substring ? this : companion_.get();
  if (canonical.size() > L && windows == nullptr) {
    throw LongQueryUnsupported("long-query support not built: query exceeds " + std::to_string(L) +
                               " bytes; rebuild with --long-queries");
  }
  std::vector<WindowRatio> ratios;
  ratios.reserve(canonical.size() - L);
  for (std::size_t end = L + 1; end <= canonical.size(); ++end) {
    const auto window = canonical.substr(end - L, L);
    ratios.push_back({windows->short_estimate(window, routing),
                      windows->short_estimate(window.substr(0, L - 1), routing)});
  }
  return compose_markov(short_estimate(canonical.substr(0, L), routing), ratios, scheme_.bucket(1).est);
}

double EstimatorModel::estimate_canonical(std::string_view canonical, Routing routing) const {
  if (canonical.empty()) throw std::invalid_argument("query body is empty");
  if (canonical.size() <= config_.max_len) return short_estimate(canonical, routing);
  return markov_canonical(canonical, routing);
}

double EstimatorModel::estimate(const Query& query, Routing routing) const {
  if (query.kind != kind_) {
    throw std::invalid_argument("model answers " + std::string(to_string(kind_)) + " queries, got " +
                                std::string(to_string(query.kind)));
  }
  return estimate_canonical(canonical_body(query), routing);
}

double EstimatorModel::markov_estimate(const Query& query) const {
  if (query.kind != kind_) return estimate(query);  // reports the mismatch
  if (query.body.size() < config_.max_len) {
    throw std::invalid_argument("Markov estimate needs a body of at least the max length");
  }
  return markov_canonical(canonical_body(query), Routing::PrefixWalk);
}

std::uint64_t EstimatorModel::structure_bits() const noexcept {
  std::uint64_t bytes = 0;
  for (const auto& f : filters_) bytes += f.serialized_bytes();
  if (trie_) bytes += trie_->serialized_bytes();
  return bytes * 8;
}

void EstimatorModel::write_body(detail::ByteWriter& out) const {
  out.put(static_cast<std::uint8_t>(kind_));
  out.put(scheme_.eb());
  out.put(static_cast<std::uint16_t>(config_.max_len));
  out.put(static_cast<std::uint8_t>(config_.p_n ? 1 : 0));
  out.put(config_.p_n.value_or(0.0));
  out.put(dataset_size_);
  out.put(master_seed_);
  out.put(static_cast<std::uint16_t>(scheme_.size()));
  out.put(static_cast<std::uint16_t>(threshold_));
  for (const auto& f : filters_) f.serialize(out);
  out.put(static_cast<std::uint8_t>(trie_ ? 1 : 0));
  if (trie_) trie_->serialize(out);
  out.put(static_cast<std::uint8_t>(companion_ ? 1 : 0));
  if (companion_) companion_->write_body(out);
}

std::string EstimatorModel::serialize() const {
  detail::ByteWriter out;
  out.put_bytes(std::string_view(kModelMagic, sizeof kModelMagic));
  out.put(kModelFormatVersion);
  write_body(out);
  const auto checksum = hash64(out.bytes(), kChecksumSeed);
  out.put(checksum);
  return std::move(out).take();
}

EstimatorModel EstimatorModel::read_body(detail::ByteReader& in) {
  const auto kind_byte = in.get<std::uint8_t>();
  if (kind_byte > 2) corrupt("unknown pattern kind");
  Config config;
  config.eb = in.get<double>();
  config.max_len = in.get<std::uint16_t>();
  const auto has_pn = in.get<std::uint8_t>();
  const auto pn = in.get<double>();
  if (has_pn > 1) corrupt("bad flag");
  if (has_pn == 1) config.p_n = pn;
  const auto dataset_size = in.get<std::uint64_t>();
  const auto master_seed = in.get<std::uint64_t>();
  const std::uint32_t count = in.get<std::uint16_t>();
  const std::uint32_t tau = in.get<std::uint16_t>();
  if (count == 0 || tau == 0 || tau > count) corrupt("bad bucket counts");
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    corrupt(e.what());
  }

  std::vector<LayeredFilter> filters;
  filters.reserve(tau > 1 ? tau - 1 : 0);
  for (std::uint32_t id = 2; id <= tau; ++id) filters.push_back(LayeredFilter::deserialize(in, id));

  std::optional<CompactTrie> trie;
  const auto has_trie = in.get<std::uint8_t>();
  if (has_trie > 1 || (has_trie == 1) != (tau < count)) corrupt("bad trie flag");
  if (has_trie == 1) trie = CompactTrie::deserialize(in, tau);

  std::shared_ptr<const EstimatorModel> companion;
  const auto has_companion = in.get<std::uint8_t>();
  if (has_companion > 1) corrupt("bad companion flag");
  if (has_companion == 1) companion = std::make_shared<const EstimatorModel>(read_body(in));

  config.long_queries = companion != nullptr;
  if (tau != count) config.tree_threshold = tau;
  EstimatorModel model(config, static_cast<PatternKind>(kind_byte), BucketScheme::with_count(config.eb, count));
  model.dataset_size_ = dataset_size;
  model.master_seed_ = master_seed;
  model.threshold_ = tau;
  model.trie_ = std::move(trie);
  model.companion_ = std::move(companion);
  model.plan_.threshold = tau;
  model.plan_.p_n = config.p_n;
  model.plan_.trie_nodes = model.trie_ ? model.trie_->node_count() : 0;
  for (const auto& f : filters) {
    BucketPlan bp;
    bp.bucket_id = f.bucket_id();
    bp.m = f.layers();
    bp.f = f.f();
    model.plan_.buckets.push_back(bp);
  }
  model.filters_ = std::move(filters);
  return model;
}

EstimatorModel EstimatorModel::deserialize(std::string_view bytes) {
  if (bytes.size() < sizeof kModelMagic || std::memcmp(bytes.data(), kModelMagic, sizeof kModelMagic) != 0) {
    throw ModelFormatError(FormatKind::NotAModel, "not a model file (bad magic)");
  }
  detail::ByteReader in(bytes);
  (void)in.get_bytes(sizeof kModelMagic);
  const auto version = in.get<std::uint16_t>();
  if (version != kModelFormatVersion) {
    throw ModelFormatError(FormatKind::UnsupportedVersion,
                           "unsupported model version " + std::to_string(version));
  }
  // The body is parsed before the checksum is checked so that a short file
  // reports truncation; any other structural damage counts as corruption.
  std::optional<EstimatorModel> model;
  try {
    model.emplace(read_body(in));
  } catch (const ModelFormatError&) {
    throw;
  } catch (const std::exception& e) {
    corrupt(e.what());
  }
  if (in.remaining() < sizeof(std::uint64_t)) {
    throw ModelFormatError(FormatKind::Truncated, "model file is truncated");
  }
  if (in.remaining() > sizeof(std::uint64_t)) corrupt("trailing bytes");
  const auto stored = in.get<std::uint64_t>();
  const auto actual = hash64(bytes.substr(0, bytes.size() - sizeof(std::uint64_t)), kChecksumSeed);
  if (stored != actual) throw ModelFormatError(FormatKind::ChecksumMismatch, "model checksum mismatch");
  return std::move(*model);
}

void EstimatorModel::save(const std::string& path) const {
  const auto bytes = serialize();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing " + path);
}

EstimatorModel EstimatorModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize(buf.str());
}

}  // namespace likecard
