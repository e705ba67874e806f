#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "likecard/estimator.hpp"
#include "likecard/groundtruth.hpp"

namespace likecard {

/// Estimates below this count as an identified empty answer.
inline constexpr double kEmptyIdentificationCutoff = 2.0;

/// Mean and nearest-rank quantiles of a Q-error sample.
struct QErrorSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double p50 = 0.0;
  double p90 = 0.0;
  double p99 = 0.0;
  double p100 = 0.0;
};

/// Nearest-rank quantile: the ceil(p*N)-th smallest value (1-based, at least
/// the first). `sorted` must be ascending and non-empty.
[[nodiscard]] double nearest_rank(std::span<const double> sorted, double p);

/// Summary of a sample; nullopt when it is empty. The sample is sorted in place.
[[nodiscard]] std::optional<QErrorSummary> summarize(std::vector<double>& qerrors);

struct RangeRow {
  std::uint32_t bucket_id = 0;  ///< 0 marks cardinalities above the model's last bucket
  std::uint64_t c_lo = 0;
  std::uint64_t c_hi = 0;
  QErrorSummary stats;
};

struct LengthRow {
  std::uint32_t length = 0;
  QErrorSummary stats;
};

struct EvalReport {
  std::size_t queries = 0;
  std::size_t non_empty = 0;
  std::size_t empty = 0;
  std::optional<QErrorSummary> overall;   ///< nullopt when no non-empty query
  std::vector<RangeRow> by_range;         ///< ascending bucket id
  std::vector<LengthRow> by_length;       ///< ascending body length
  std::size_t identified_empty = 0;
  std::optional<double> identification_rate;  ///< nullopt when no empty query
  std::uint64_t model_bytes = 0;
  std::optional<double> build_seconds;
  double mean_latency_us = 0.0;
};

/// Runs every workload query through the model. Throws std::invalid_argument
/// when the workload is empty or its kind differs from the model's.
[[nodiscard]] EvalReport evaluate(const EstimatorModel& model, const Workload& workload, std::uint64_t model_bytes,
                                  std::optional<double> build_seconds = std::nullopt);

/// Keys: queries, non_empty, empty, qerror{count,mean,p50,p90,p99,p100} or
/// null, by_range[{bucket,c_lo,c_hi,...}], by_length[{length,...}],
/// identified_empty, identification_rate (or null), model_bytes,
/// build_seconds (or null), mean_latency_us.
[[nodiscard]] nlohmann::json to_json(const EvalReport& report);

/// Aligned plain-text table.
[[nodiscard]] std::string to_text(const EvalReport& report);

}  // namespace likecard
