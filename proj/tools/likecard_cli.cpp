// likecard: build, query and evaluate LIKE-pattern cardinality models.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "likecard/errors.hpp"
#include "likecard/estimator.hpp"
#include "likecard/evaluation.hpp"
#include "likecard/groundtruth.hpp"

namespace {

using namespace likecard;

constexpr int kUsageError = 2;

PatternKind kind_flag(const std::string& text) {
  try {
    return parse_kind(text);
  } catch (const std::invalid_argument&) {
    throw CLI::ValidationError("--pattern", "expected prefix, suffix or substring, got '" + text + "'");
  }
}

void print_plan(const EstimatorModel& model, double seconds, std::uint64_t bytes, bool explain) {
  const auto& plan = model.plan();
  std::printf("kind           %s\n", std::string(to_string(model.kind())).c_str());
  std::printf("rows           %llu\n", static_cast<unsigned long long>(model.dataset_size()));
  std::printf("buckets        %u (eb %.4g, max coverage %llu)\n", model.scheme().size(), model.scheme().eb(),
              static_cast<unsigned long long>(model.scheme().max_coverage()));
  std::printf("tree threshold %u (%zu trie nodes)\n", model.threshold(),
              model.trie() ? model.trie()->node_count() : std::size_t{0});
  std::printf("predicted bits %.0f (filters %.0f, trie %.0f)\n", plan.predicted_bits(), plan.filter_bits,
              plan.trie_bits);
  std::printf("model bytes    %llu\n", static_cast<unsigned long long>(bytes));
  if (const auto walk = plan.walk_probability()) std::printf("empty to B1    >= %.6f (modelled)\n", *walk);
  if (model.companion() != nullptr) std::printf("long queries   enabled\n");
  std::printf("build seconds  %.2f\n", seconds);
  if (!explain) return;
  std::printf("\n%6s %10s %10s %3s %12s %14s %14s\n", "bucket", "positives", "negatives", "m", "f", "predicted",
              "actual bits");
  for (std::size_t i = 0; i < plan.buckets.size(); ++i) {
    const auto& bp = plan.buckets[i];
    const auto& filter = model.filters()[i];
    std::printf("%6u %10llu %10llu %3u %12.6g %14.0f %14llu\n", bp.bucket_id,
                static_cast<unsigned long long>(bp.stats.n_pos), static_cast<unsigned long long>(bp.stats.n_neg),
                bp.m, bp.f, bp.total_bits(), static_cast<unsigned long long>(filter.serialized_bytes() * 8));
  }
}

int run(int argc, char** argv) {
  CLI::App app{"LIKE-pattern cardinality estimation with bucketed layered Bloom filters"};
  app.require_subcommand(1);

  auto* build = app.add_subcommand("build", "Build a model from a dataset");
  std::string data_path, out_path, pattern;
  Config config;
  double pn = 0.0;
  std::uint32_t tree_threshold = 0;
  bool no_frontier = false;
  bool explain = false;
  std::uint64_t seed = 0;
  build->add_option("--data", data_path, "Newline-delimited rows")->required();
  build->add_option("--pattern", pattern, "prefix, suffix or substring")->required();
  build->add_option("--eb", config.eb, "Error bound (> 1)")->required();
  build->add_option("--max-len", config.max_len, "Longest pattern handled exactly")->required();
  auto* pn_opt = build->add_option("--pn", pn, "Minimum empty-answer identification probability");
  auto* tau_opt = build->add_option("--tree-threshold", tree_threshold, "Buckets above this go to the trie");
  build->add_flag("--no-frontier", no_frontier, "Use all of B1 as negatives");
  build->add_flag("--long-queries", config.long_queries, "Keep substring statistics for long prefix/suffix queries");
  build->add_flag("--explain", explain, "Print the per-bucket plan");
  build->add_option("--seed", seed, "Master seed")->required();
  build->add_option("-o", out_path, "Output model file")->required();

  auto* estimate = app.add_subcommand("estimate", "Estimate one pattern");
  std::string model_path, query_text;
  bool round = false;
  estimate->add_option("-m", model_path, "Model file")->required();
  estimate->add_option("query", query_text, "Pattern: S%, %S or %S%")->required();
  estimate->add_flag("--round", round, "Print a round-half-up integer");

  auto* eval = app.add_subcommand("eval", "Evaluate a model on a workload");
  std::string workload_path;
  bool as_json = false;
  eval->add_option("-m", model_path, "Model file")->required();
  eval->add_option("-w", workload_path, "Workload file")->required();
  eval->add_flag("--json", as_json, "Machine-readable output");

  auto* gen = app.add_subcommand("gen", "Generate a labelled workload");
  std::size_t n_pos = 0, n_neg = 0, max_extra = 3;
  std::uint32_t gen_max_len = 10;
  gen->add_option("--data", data_path, "Newline-delimited rows")->required();
  gen->add_option("--pattern", pattern, "prefix, suffix or substring")->required();
  gen->add_option("--pos", n_pos, "Non-empty queries")->required();
  gen->add_option("--neg", n_neg, "Empty-answer queries")->required();
  gen->add_option("--max-extra", max_extra, "Most bytes appended to build an empty query");
  gen->add_option("--max-len", gen_max_len, "Longest pattern enumerated");
  gen->add_option("--seed", seed, "Seed")->required();
  gen->add_option("-o", out_path, "Output workload file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (*build) {
    const auto kind = kind_flag(pattern);
    if (*pn_opt) config.p_n = pn;
    if (*tau_opt) config.tree_threshold = tree_threshold;
    config.use_frontier = !no_frontier;
    config.validate();
    const auto dataset = read_dataset(data_path);
    const auto start = std::chrono::steady_clock::now();
    const auto model = EstimatorModel::build(dataset, kind, config, seed);
    const std::chrono::duration<double> seconds = std::chrono::steady_clock::now() - start;
    const auto bytes = model.serialize();
    model.save(out_path);
    print_plan(model, seconds.count(), bytes.size(), explain);
    return 0;
  }

  if (*estimate) {
    const auto query = Query::parse(query_text);
    const auto model = EstimatorModel::load(model_path);
    const double value = model.estimate(query);
    if (round) {
      std::printf("%.0f\n", std::floor(value + 0.5));
    } else {
      std::printf("%.2f\n", value);
    }
    return 0;
  }

  if (*eval) {
    const auto model = EstimatorModel::load(model_path);
    const auto workload = read_workload(workload_path);
    const auto bytes = std::filesystem::file_size(model_path);
    const auto report = evaluate(model, workload, bytes);
    if (as_json) {
      std::cout << to_json(report).dump(2) << "\n";
    } else {
      std::cout << to_text(report);
    }
    return 0;
  }

  const auto kind = kind_flag(pattern);
  const auto dataset = read_dataset(data_path);
  const auto catalog = enumerate(dataset, kind, gen_max_len);
  write_workload(out_path, gen_workload(catalog, dataset, n_pos, n_neg, max_extra, seed));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const likecard::InfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
