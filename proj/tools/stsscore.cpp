// stsscore — score sentence pairs, run benchmarks and render result tables.
//
//   stsscore score --metric sts --bundle-dir bundles/sts --text-a "..." --text-b "..."
//   stsscore score --pairs pairs.jsonl --metric bleu,sbert --bundle-dir bundles
//   stsscore benchmark --dataset stsb --data sts-test.tsv --metrics sts,bleu --bundles bundles --out results
//   stsscore report --runs results/runs/<id> ... --format md [--figures]
//
// Exit codes: 0 success, 1 partial run, 2 configuration error, 3 data error.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "stsscore/backend/model.hpp"
#include "stsscore/error.hpp"
#include "stsscore/ingest.hpp"
#include "stsscore/metrics/bleu.hpp"
#include "stsscore/metrics/embed.hpp"
#include "stsscore/metrics/sts.hpp"
#include "stsscore/report/figures.hpp"
#include "stsscore/report/run.hpp"
#include "stsscore/report/table.hpp"

namespace fs = std::filesystem;
using namespace stsscore;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

int exit_code_for(Errc code) { return classify(code) == ErrorClass::data ? kExitData : kExitConfig; }

std::vector<MetricId> parse_metric_list(const std::string& list) {
  std::vector<MetricId> out;
  std::stringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    const auto metric = parse_metric(item);
    if (!metric) fail(Errc::invalid_argument, "unknown metric '" + item + "'");
    if (std::find(out.begin(), out.end(), *metric) == out.end()) out.push_back(*metric);
  }
  if (out.empty()) fail(Errc::invalid_argument, "no metrics given");
  return out;
}

// --bundle-dir names either one bundle (it holds bundle.json) or a directory
// with sts/, sbert/ and bertscore/ subdirectories.
BundleSet bundles_for(const std::optional<fs::path>& dir, std::span<const MetricId> metrics) {
  const auto needed = required_metrics(metrics);
  const bool needs_model = std::any_of(needed.begin(), needed.end(), [](MetricId m) { return m != MetricId::bleu; });
  if (!needs_model) return {};
  if (!dir) fail(Errc::bundle_missing, "--bundle-dir is required for model-based metrics");
  if (!fs::exists(*dir / kConfigFile)) return BundleSet::from_directory(*dir, metrics);

  std::vector<MetricId> model_metrics;
  for (auto m : needed)
    if (m != MetricId::bleu) model_metrics.push_back(m);
  if (model_metrics.size() != 1)
    fail(Errc::bundle_missing, "a single bundle directory serves one model metric; pass a bundle set root instead");
  auto bundle = load_bundle(*dir);
  BundleSet set;
  switch (model_metrics.front()) {
    case MetricId::sts:
      if (bundle.kind() != BundleKind::regression_pair) fail(Errc::malformed_config, "sts needs a regression_pair bundle");
      set.sts = std::move(bundle);
      break;
    case MetricId::sbert:
      if (bundle.kind() != BundleKind::encoder) fail(Errc::malformed_config, "sbert needs an encoder bundle");
      set.sbert = std::move(bundle);
      break;
    default:
      if (bundle.kind() != BundleKind::encoder) fail(Errc::malformed_config, "bertscore needs an encoder bundle");
      set.bertscore = std::move(bundle);
      break;
  }
  return set;
}

std::vector<MetricScore> score_all(MetricId metric, const BundleSet& bundles, std::span<const SentencePair> pairs,
                                   bool clamp, std::size_t batch_size) {
  switch (metric) {
    case MetricId::bleu: {
      std::vector<MetricScore> out;
      for (const auto& p : pairs) out.push_back(sentence_bleu(p));
      return out;
    }
    case MetricId::sts:
      return sts_score_batch(StsConfig::from_bundle(*bundles.sts, clamp), pairs, batch_size);
    case MetricId::sbert:
      return sbert_score_batch(*bundles.sbert, pairs, batch_size);
    case MetricId::bertscore: {
      std::optional<IdfTable> idf;
      if (bundles.bertscore->config().idf) {
        std::vector<std::string> refs;
        for (const auto& p : pairs) refs.push_back(p.text_a);
        idf = IdfTable::from_corpus(bundles.bertscore->tokenizer(), refs);
      }
      const auto reports = token_match_batch(*bundles.bertscore, pairs, idf ? &*idf : nullptr, batch_size);
      std::vector<MetricScore> out;
      for (std::size_t i = 0; i < pairs.size(); ++i) out.push_back(to_metric_score(reports[i], *bundles.bertscore, pairs[i].id));
      return out;
    }
    case MetricId::ensemble: {
      const auto sts = score_all(MetricId::sts, bundles, pairs, clamp, batch_size);
      const auto sbert = score_all(MetricId::sbert, bundles, pairs, clamp, batch_size);
      const auto bert = score_all(MetricId::bertscore, bundles, pairs, clamp, batch_size);
      std::vector<MetricScore> out;
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        const MetricScore parts[] = {sts[i], sbert[i], bert[i]};
        out.push_back(ensemble_score(parts));
      }
      return out;
    }
  }
  return {};
}

struct ScoreArgs {
  std::string metric = "bleu";
  std::optional<fs::path> bundle_dir;
  std::optional<std::string> text_a;
  std::optional<std::string> text_b;
  std::optional<fs::path> pairs;
  bool no_clamp = false;
  std::size_t batch_size = kDefaultBatchSize;
};

int run_score(const ScoreArgs& args) {
  const auto metrics = parse_metric_list(args.metric);
  const auto bundles = bundles_for(args.bundle_dir, metrics);
  if (args.pairs) {
    const auto dataset = load_dataset(DatasetSource{SourceKind::canonical_jsonl, *args.pairs});
    std::vector<SentencePair> pairs;
    for (const auto& lp : dataset.pairs) pairs.push_back(lp.pair);
    std::vector<std::vector<MetricScore>> columns;
    for (auto m : metrics) columns.push_back(score_all(m, bundles, pairs, !args.no_clamp, args.batch_size));
    std::cout << "id,metric,score\n";
    for (std::size_t i = 0; i < pairs.size(); ++i)
      for (std::size_t m = 0; m < metrics.size(); ++m)
        std::cout << pairs[i].id << ',' << to_string(metrics[m]) << ',' << format_number(columns[m][i].score) << '\n';
    return kExitOk;
  }
  if (!args.text_a || !args.text_b) fail(Errc::invalid_argument, "score needs --text-a and --text-b, or --pairs");
  if (metrics.size() != 1) fail(Errc::invalid_argument, "--text-a/--text-b take a single --metric");
  const SentencePair pair{"cli", *args.text_a, *args.text_b};
  const auto scores = score_all(metrics.front(), bundles, std::span(&pair, 1), !args.no_clamp, args.batch_size);
  std::cout << format_number(scores.front().score) << '\n';
  return kExitOk;
}

struct BenchmarkArgs {
  std::string dataset;
  fs::path data;
  std::string metrics;
  std::optional<fs::path> bundles;
  fs::path out;
  std::optional<std::size_t> subset;
  std::uint64_t seed = 0;
  bool stratify = false;
  bool length_split = false;
  std::optional<fs::path> cache;
  std::size_t workers = 0;
  std::size_t batch_size = kDefaultBatchSize;
  bool no_clamp = false;
  std::string run_id;
  std::string split = "test";
  bool skip_empty = false;
};

int run_benchmark_cmd(const BenchmarkArgs& args) {
  const auto kind = parse_source_kind(args.dataset);
  if (!kind) fail(Errc::invalid_argument, "unknown dataset '" + args.dataset + "'");
  const auto metrics = parse_metric_list(args.metrics);
  const auto needed = required_metrics(metrics);
  const bool needs_model = std::any_of(needed.begin(), needed.end(), [](MetricId m) { return m != MetricId::bleu; });
  if (needs_model && !args.bundles) fail(Errc::bundle_missing, "--bundles is required for model-based metrics");
  const auto bundles = needs_model ? BundleSet::from_directory(*args.bundles, metrics) : BundleSet{};

  DatasetSource source{*kind, args.data, args.split, args.skip_empty};
  RunOptions options;
  options.subset_n = args.subset;
  options.seed = args.seed;
  options.stratify = args.stratify;
  options.length_split = args.length_split;
  options.clamp_sts = !args.no_clamp;
  options.workers = args.workers;
  options.batch_size = args.batch_size;
  options.cache_dir = args.cache;
  options.run_id = args.run_id;

  const auto run = run_benchmark(source, metrics, bundles, options);
  const auto dir = save_run(run, args.out);
  const BenchmarkRun runs[] = {run};
  std::cout << render_markdown(summary_table(runs));
  std::cout << "run: " << dir.string() << "\n";
  std::cout << "pairs: " << run.dataset.size() << ", cache hits: " << run.cache_hits
            << ", cache misses: " << run.cache_misses << "\n";
  if (run.partial) {
    std::cerr << "partial run: " << run.failures.size() << " pair(s) failed; see manifest.json\n";
    return kExitPartial;
  }
  return kExitOk;
}

// A --runs entry is a run directory (holding manifest.json) or an output root
// whose runs/ subdirectory holds several.
std::vector<fs::path> expand_run_dirs(const std::vector<fs::path>& entries) {
  std::vector<fs::path> out;
  for (const auto& e : entries) {
    if (fs::exists(e / "manifest.json")) {
      out.push_back(e);
      continue;
    }
    if (!fs::is_directory(e / "runs")) fail(Errc::missing_file, e.string() + " is not a run directory");
    std::vector<fs::path> found;
    for (const auto& d : fs::directory_iterator(e / "runs"))
      if (fs::exists(d.path() / "manifest.json")) found.push_back(d.path());
    std::sort(found.begin(), found.end());
    out.insert(out.end(), found.begin(), found.end());
  }
  if (out.empty()) fail(Errc::missing_file, "no runs found");
  return out;
}

struct ReportArgs {
  std::vector<fs::path> runs;
  std::string format = "md";
  bool figures = false;
  std::string split_metric = "sts";
};

int run_report(const ReportArgs& args) {
  std::vector<BenchmarkRun> runs;
  const auto dirs = expand_run_dirs(args.runs);
  for (const auto& d : dirs) runs.push_back(load_run(d));

  const auto table = summary_table(runs);
  const bool all_split = std::all_of(runs.begin(), runs.end(), [](const BenchmarkRun& r) { return r.length_split.has_value(); });
  std::optional<SummaryTable> split_table;
  if (all_split) {
    const auto metric = parse_metric(args.split_metric);
    if (!metric) fail(Errc::invalid_argument, "unknown metric '" + args.split_metric + "'");
    split_table = length_split_table(runs, *metric);
  }

  if (args.format == "md") {
    std::cout << render_markdown(table);
    if (split_table) std::cout << "\n" << render_markdown(*split_table);
  } else if (args.format == "csv") {
    std::cout << render_csv(table);
    if (split_table) std::cout << "\n" << render_csv(*split_table);
  } else {
    nlohmann::ordered_json j;
    j["summary"] = nlohmann::ordered_json::parse(render_json(table));
    if (split_table) j["length_split"] = nlohmann::ordered_json::parse(render_json(*split_table));
    std::cout << j.dump(2) << "\n";
  }

  if (args.figures) {
    for (std::size_t i = 0; i < runs.size(); ++i) {
      for (const auto& f : emit_figures(runs[i], dirs[i] / "figures")) std::cerr << "figure: " << f.string() << "\n";
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic similarity scores and benchmark reports"};
  app.require_subcommand(1);

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "Score one pair or a canonical JSONL file of pairs");
  score_cmd->add_option("--metric", score.metric, "bleu|bertscore|sbert|sts|ensemble (comma list with --pairs)");
  score_cmd->add_option("--bundle-dir", score.bundle_dir, "Model bundle, or a directory of sts/sbert/bertscore bundles");
  auto* text_a = score_cmd->add_option("--text-a", score.text_a, "First text (the BLEU/BERTScore reference)");
  auto* text_b = score_cmd->add_option("--text-b", score.text_b, "Second text (the candidate)");
  auto* pairs = score_cmd->add_option("--pairs", score.pairs, "Canonical JSONL file; prints id,metric,score CSV");
  pairs->excludes(text_a)->excludes(text_b);
  score_cmd->add_flag("--no-clamp", score.no_clamp, "Report unclamped STSScore values");
  score_cmd->add_option("--batch-size", score.batch_size, "Sequences per model call")->check(CLI::PositiveNumber);

  BenchmarkArgs bench;
  auto* bench_cmd = app.add_subcommand("benchmark", "Score a dataset with several metrics and save the run");
  bench_cmd->add_option("--dataset", bench.dataset, "stsb|mrpc|qqp|wmt22_zh_en|canonical")->required();
  bench_cmd->add_option("--data", bench.data, "Dataset file")->required();
  bench_cmd->add_option("--metrics", bench.metrics, "Comma-separated metric list")->required();
  bench_cmd->add_option("--bundles", bench.bundles, "Directory with sts/, sbert/ and bertscore/ bundles");
  bench_cmd->add_option("--out", bench.out, "Output root; the run goes to <out>/runs/<run_id>")->required();
  auto* subset_opt = bench_cmd->add_option("--subset", bench.subset, "Score a seeded sample of N pairs");
  bench_cmd->add_option("--seed", bench.seed, "Sampling seed");
  bench_cmd->add_flag("--stratify", bench.stratify, "Keep class proportions in the sample")->needs(subset_opt);
  bench_cmd->add_flag("--length-split", bench.length_split, "Also summarise the shorter and longer halves");
  bench_cmd->add_option("--cache", bench.cache, "Score cache directory");
  bench_cmd->add_option("--workers", bench.workers, "Worker threads (0 = all cores)");
  bench_cmd->add_option("--batch-size", bench.batch_size, "Sequences per model call")->check(CLI::PositiveNumber);
  bench_cmd->add_flag("--no-clamp", bench.no_clamp, "Keep unclamped STSScore values");
  bench_cmd->add_option("--run-id", bench.run_id, "Run identifier (generated when omitted)");
  bench_cmd->add_option("--split", bench.split, "Split name recorded for the dataset");
  bench_cmd->add_flag("--skip-empty", bench.skip_empty, "Drop rows with an empty text instead of failing");

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Render a summary table over saved runs");
  report_cmd->add_option("--runs", report.runs, "Run directories or output roots")->required()->expected(1, -1);
  report_cmd->add_option("--format", report.format, "csv|json|md")->check(CLI::IsMember({"csv", "json", "md"}));
  report_cmd->add_flag("--figures", report.figures, "Write SVG figures into each run's figures/ directory");
  report_cmd->add_option("--split-metric", report.split_metric, "Metric shown in the length-split table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*score_cmd) return run_score(score);
    if (*bench_cmd) return run_benchmark_cmd(bench);
    return run_report(report);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}
