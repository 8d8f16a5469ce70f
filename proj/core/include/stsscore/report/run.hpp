#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "stsscore/backend/model.hpp"
#include "stsscore/ingest.hpp"
#include "stsscore/metrics/embed.hpp"
#include "stsscore/stats.hpp"
#include "stsscore/types.hpp"

namespace stsscore {

// Bundles for the model-backed metrics. On disk: <root>/sts, <root>/sbert,
// <root>/bertscore; the ensemble needs all three.
struct BundleSet {
  std::optional<ModelBundle> sts;
  std::optional<ModelBundle> sbert;
  std::optional<ModelBundle> bertscore;

  // Loads the bundles the given metrics need. Throws bundle_missing when a
  // required subdirectory is absent and malformed_config on a kind mismatch.
  static BundleSet from_directory(const std::filesystem::path& root, std::span<const MetricId> metrics);

  const ModelBundle* get(MetricId metric) const;
};

// Metrics a request needs scored, in canonical order (ensemble expands to its parts).
std::vector<MetricId> required_metrics(std::span<const MetricId> requested);

struct RunOptions {
  std::optional<std::size_t> subset_n;
  std::uint64_t seed = 0;
  bool stratify = false;
  bool length_split = false;
  bool clamp_sts = true;
  std::size_t workers = 0;  // 0 = hardware concurrency
  std::size_t batch_size = kDefaultBatchSize;
  std::optional<std::filesystem::path> cache_dir;
  std::string run_id;  // generated when empty
};

struct MetricSummary {
  MetricId metric = MetricId::bleu;
  std::size_t n = 0;
  std::optional<CorrelationReport> correlation;                   // similarity_0_5, mqm
  std::optional<std::pair<ClassSummary, ClassSummary>> classes;  // binary: (neg, pos)
  std::optional<RocResult> roc;                                   // binary
  std::string error;  // set when the statistic is undefined for this subset
};

struct LengthSplitSummary {
  double median = 0.0;
  std::size_t shorter_n = 0;
  std::size_t longer_n = 0;
  std::vector<MetricSummary> shorter;
  std::vector<MetricSummary> longer;
};

struct PairFailure {
  std::string pair_id;
  MetricId metric = MetricId::bleu;
  std::string error;
};

struct BenchmarkRun {
  std::string run_id;
  DatasetSource source;
  LabeledDataset dataset;  // the pairs that were scored (after subsetting)
  std::vector<MetricId> metrics;
  std::vector<MetricScore> scores;  // pair order, then metric order
  std::vector<std::pair<std::string, MatchReport>> match_reports;  // bertscore details per pair
  std::vector<MetricSummary> summaries;
  std::optional<LengthSplitSummary> length_split;
  std::vector<PairFailure> failures;
  bool partial = false;
  nlohmann::ordered_json manifest;

  // Execution counters; not part of the deterministic content.
  std::uint64_t inference_calls = 0;
  std::size_t cache_hits = 0;
  std::size_t cache_misses = 0;

  LabelKind label_kind() const { return dataset.label_kind(); }
};

// Loads the dataset, optionally subsets it, scores every pair with every
// requested metric (cache first, bounded worker pool) and summarises per
// label kind. Pair-level failures mark the run partial instead of aborting.
// Errors: bundle_missing; dataset errors propagate.
BenchmarkRun run_benchmark(const DatasetSource& source, std::span<const MetricId> metrics, const BundleSet& bundles,
                           const RunOptions& options);

// Statistics for one metric over the dataset's labels, using the pairs that have a score.
MetricSummary summarize(MetricId metric, const LabeledDataset& dataset, std::span<const MetricScore> scores);

nlohmann::ordered_json summary_json(const BenchmarkRun& run);

// Writes <out_root>/runs/<run_id>/{manifest.json, scores.csv, summary.json,
// pairs.jsonl, details.jsonl, figures/} under an exclusive .lock file. Existing
// runs are never overwritten. Returns the run directory.
std::filesystem::path save_run(const BenchmarkRun& run, const std::filesystem::path& out_root);

// Reads a saved run; summaries are recomputed from scores and pairs.
BenchmarkRun load_run(const std::filesystem::path& run_dir);

// scores.csv with header pair_id,metric,score,raw,model_fingerprint.
std::string scores_csv(std::span<const MetricScore> scores);
std::vector<MetricScore> parse_scores_csv(const std::string& content);

}  // namespace stsscore
