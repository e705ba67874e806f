#include "likecard/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace likecard {

double nearest_rank(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(p * n));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

std::optional<QErrorSummary> summarize(std::vector<double>& qerrors) {
  if (qerrors.empty()) return std::nullopt;
  std::sort(qerrors.begin(), qerrors.end());
  QErrorSummary s;
  s.count = qerrors.size();
  // Summing in sorted order keeps the mean independent of workload order.
  s.mean = std::accumulate(qerrors.begin(), qerrors.end(), 0.0) / static_cast<double>(qerrors.size());
  s.p50 = nearest_rank(qerrors, 0.50);
  s.p90 = nearest_rank(qerrors, 0.90);
  s.p99 = nearest_rank(qerrors, 0.99);
  s.p100 = qerrors.back();
  return s;
}

EvalReport evaluate(const EstimatorModel& model, const Workload& workload, std::uint64_t model_bytes,
                    std::optional<double> build_seconds) {
  if (workload.entries.empty()) throw std::invalid_argument("workload is empty");
  for (const auto& e : workload.entries) {
    if (e.query.kind != model.kind()) {
      throw std::invalid_argument("workload has " + std::string(to_string(e.query.kind)) +
                                  " queries but the model answers " + std::string(to_string(model.kind())));
    }
  }

  EvalReport report;
  report.queries = workload.entries.size();
  report.model_bytes = model_bytes;
  report.build_seconds = build_seconds;

  std::vector<double> estimates(workload.entries.size());
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < workload.entries.size(); ++i) estimates[i] = model.estimate(workload.entries[i].query);
  const std::chrono::duration<double, std::micro> elapsed = std::chrono::steady_clock::now() - start;
  report.mean_latency_us = elapsed.count() / static_cast<double>(workload.entries.size());

  const auto& scheme = model.scheme();
  std::vector<double> all;
  std::map<std::uint32_t, std::vector<double>> by_bucket;
  std::map<std::uint32_t, std::vector<double>> by_length;
  for (std::size_t i = 0; i < workload.entries.size(); ++i) {
    const auto& e = workload.entries[i];
    if (e.cardinality == 0) {
      ++report.empty;
      if (estimates[i] < kEmptyIdentificationCutoff) ++report.identified_empty;
      continue;
    }
    ++report.non_empty;
    const double q = q_error(estimates[i], static_cast<double>(e.cardinality));
    all.push_back(q);
    const std::uint32_t bucket = e.cardinality > scheme.max_coverage() ? 0 : scheme.bucket_of(e.cardinality);
    by_bucket[bucket].push_back(q);
    by_length[static_cast<std::uint32_t>(e.query.body.size())].push_back(q);
  }

  report.overall = summarize(all);
  for (auto& [id, sample] : by_bucket) {
    if (id == 0) continue;
    RangeRow row{id, scheme.bucket(id).c_l, scheme.bucket(id).c_u, *summarize(sample)};
    report.by_range.push_back(row);
  }
  if (auto it = by_bucket.find(0); it != by_bucket.end()) {
    report.by_range.push_back({0, scheme.max_coverage() + 1, 0, *summarize(it->second)});
  }
  for (auto& [len, sample] : by_length) report.by_length.push_back({len, *summarize(sample)});
  if (report.empty > 0) {
    report.identification_rate = static_cast<double>(report.identified_empty) / static_cast<double>(report.empty);
  }
  return report;
}

namespace {

nlohmann::json summary_json(const QErrorSummary& s) {
  return {{"count", s.count}, {"mean", s.mean}, {"p50", s.p50}, {"p90", s.p90}, {"p99", s.p99}, {"p100", s.p100}};
}

template <typename T>
nlohmann::json or_null(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string fmt(double v, int precision = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

std::string summary_cells(const QErrorSummary& s) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%8zu %9s %9s %9s %9s %9s", s.count, fmt(s.mean).c_str(), fmt(s.p50).c_str(),
                fmt(s.p90).c_str(), fmt(s.p99).c_str(), fmt(s.p100).c_str());
  return buf;
}

constexpr const char* kSummaryHeader = "   count      mean       p50       p90       p99      p100";

}  // namespace

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json j;
  j["queries"] = report.queries;
  j["non_empty"] = report.non_empty;
  j["empty"] = report.empty;
  j["qerror"] = report.overall ? summary_json(*report.overall) : nlohmann::json(nullptr);
  j["by_range"] = nlohmann::json::array();
  for (const auto& row : report.by_range) {
    auto r = summary_json(row.stats);
    r["bucket"] = row.bucket_id;
    r["c_lo"] = row.c_lo;
    r["c_hi"] = row.bucket_id == 0 ? nlohmann::json(nullptr) : nlohmann::json(row.c_hi);
    j["by_range"].push_back(std::move(r));
  }
  j["by_length"] = nlohmann::json::array();
  for (const auto& row : report.by_length) {
    auto r = summary_json(row.stats);
    r["length"] = row.length;
    j["by_length"].push_back(std::move(r));
  }
  j["identified_empty"] = report.identified_empty;
  j["identification_rate"] = or_null(report.identification_rate);
  j["model_bytes"] = report.model_bytes;
  j["build_seconds"] = or_null(report.build_seconds);
  j["mean_latency_us"] = report.mean_latency_us;
  return j;
}

std::string to_text(const EvalReport& report) {
  std::ostringstream out;
  out << "queries            " << report.queries << " (" << report.non_empty << " non-empty, " << report.empty
      << " empty)\n";
  out << "model bytes        " << report.model_bytes << "\n";
  out << "build seconds      " << (report.build_seconds ? fmt(*report.build_seconds, 2) : "n/a") << "\n";
  out << "mean latency (us)  " << fmt(report.mean_latency_us, 2) << "\n";
  out << "empty identified   "
      << (report.identification_rate
              ? fmt(*report.identification_rate, 4) + " (" + std::to_string(report.identified_empty) + "/" +
                    std::to_string(report.empty) + ")"
              : "n/a")
      << "\n\n";

  if (!report.overall) {
    out << "q-error            n/a\n";
    return out.str();
  }
  char line[256];
  out << "q-error                      " << kSummaryHeader << "\n";
  out << "all                          " << summary_cells(*report.overall) << "\n\n";
  out << "by true cardinality          " << kSummaryHeader << "\n";
  for (const auto& row : report.by_range) {
    const std::string label = row.bucket_id == 0
                                  ? ">" + std::to_string(row.c_lo - 1)
                                  : "[" + std::to_string(row.c_lo) + ", " + std::to_string(row.c_hi) + "]";
    std::snprintf(line, sizeof line, "%-29s%s\n", label.c_str(), summary_cells(row.stats).c_str());
    out << line;
  }
  out << "\nby query length              " << kSummaryHeader << "\n";
  for (const auto& row : report.by_length) {
    std::snprintf(line, sizeof line, "%-29u%s\n", row.length, summary_cells(row.stats).c_str());
    out << line;
  }
  return out.str();
}

}  // namespace likecard
