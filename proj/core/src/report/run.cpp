#include "stsscore/report/run.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "stsscore/cache.hpp"
#include "stsscore/error.hpp"
#include "stsscore/hash.hpp"
#include "stsscore/metrics/bleu.hpp"
#include "stsscore/metrics/sts.hpp"
#include "stsscore/report/figures.hpp"

namespace stsscore {

namespace {

constexpr const char* kToolVersion = "0.1.0";

bool is_model_metric(MetricId m) { return m == MetricId::sts || m == MetricId::sbert || m == MetricId::bertscore; }

std::string utc_timestamp(const char* format) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, format, &tm);
  return buf;
}

// Everything besides the texts and model fingerprint that changes a score.
struct MetricSetup {
  MetricId metric;
  const ModelBundle* bundle = nullptr;
  std::string config_hash;
  std::optional<IdfTable> idf;
};

std::string hash_fields(std::initializer_list<std::string> fields) {
  Sha256 h;
  for (const auto& f : fields) h.update_field(f);
  return to_hex(h.finish());
}

std::string optional_number(const std::optional<double>& v) { return v ? format_number(*v) : "none"; }

MetricSetup make_setup(MetricId metric, const BundleSet& bundles, const LabeledDataset& dataset, const RunOptions& options) {
  MetricSetup s{metric, bundles.get(metric), {}, std::nullopt};
  switch (metric) {
    case MetricId::bleu:
      s.config_hash = hash_fields({"bleu", "tokenizer=13a", "order=4", "smoothing=none", "reference=text_a"});
      break;
    case MetricId::sts:
      s.config_hash = hash_fields({"sts", "scale=" + format_number(s.bundle->config().output_scale),
                                   std::string("clamp=") + (options.clamp_sts ? "true" : "false")});
      break;
    case MetricId::sbert:
      s.config_hash = hash_fields({"sbert", "pool=mean", std::string("pool_special_tokens=") +
                                                             (s.bundle->config().pool_special_tokens ? "true" : "false")});
      break;
    case MetricId::bertscore: {
      const auto& c = s.bundle->config();
      std::string idf_digest = "none";
      if (c.idf) {
        std::vector<std::string> refs;
        Sha256 h;
        for (const auto& lp : dataset.pairs) {
          refs.push_back(lp.pair.text_a);
          h.update_field(lp.pair.text_a);
        }
        s.idf = IdfTable::from_corpus(s.bundle->tokenizer(), refs);
        idf_digest = to_hex(h.finish());
      }
      s.config_hash = hash_fields({"bertscore", "baseline=" + optional_number(c.rescale_baseline),
                                   "layer=" + (c.embedding_layer ? std::to_string(*c.embedding_layer) : std::string("last")),
                                   "idf=" + idf_digest, "reference=text_a"});
      break;
    }
    case MetricId::ensemble:
      break;
  }
  return s;
}

// Auxiliary cache entries carrying the match-report components of a bertscore score.
const char* kDetailFields[] = {"precision", "recall", "raw_f1"};

struct Scorer {
  const std::vector<MetricSetup>& setups;
  const LabeledDataset& dataset;
  const std::optional<ScoreCache>& cache;
  const RunOptions& options;

  std::map<MetricId, std::vector<std::optional<MetricScore>>> results;
  std::vector<std::optional<MatchReport>> reports;
  std::vector<PairFailure> failures;
  std::mutex failure_mutex;
  std::atomic<std::size_t> hits{0};
  std::atomic<std::size_t> misses{0};

  std::string fingerprint(const MetricSetup& s) const { return s.bundle ? s.bundle->fingerprint() : std::string(); }

  CacheKey key(const MetricSetup& s, const SentencePair& p, const std::string& suffix = {}) const {
    return CacheKey::compute(s.metric, fingerprint(s), p.text_a, p.text_b, s.config_hash + suffix);
  }

  void record_failure(const SentencePair& p, MetricId m, const std::string& what) {
    std::lock_guard lock(failure_mutex);
    failures.push_back({p.id, m, what});
  }

  // Scores pairs [begin, end) that are not cached; falls back to one pair at a
  // time when a batch fails so one bad pair cannot sink its neighbours.
  void compute(const MetricSetup& s, const std::vector<std::size_t>& idx) {
    std::vector<SentencePair> pairs;
    pairs.reserve(idx.size());
    for (auto i : idx) pairs.push_back(dataset.pairs[i].pair);
    auto batch = [&](std::span<const SentencePair> ps) {
      std::vector<MetricScore> out;
      std::vector<MatchReport> reps;
      switch (s.metric) {
        case MetricId::bleu:
          for (const auto& p : ps) out.push_back(sentence_bleu(p));
          break;
        case MetricId::sts:
          out = sts_score_batch(StsConfig{*s.bundle, s.bundle->config().output_scale, options.clamp_sts}, ps,
                                options.batch_size);
          break;
        case MetricId::sbert:
          out = sbert_score_batch(*s.bundle, ps, options.batch_size);
          break;
        case MetricId::bertscore:
          reps = token_match_batch(*s.bundle, ps, s.idf ? &*s.idf : nullptr, options.batch_size);
          for (std::size_t k = 0; k < ps.size(); ++k) out.push_back(to_metric_score(reps[k], *s.bundle, ps[k].id));
          break;
        case MetricId::ensemble:
          break;
      }
      return std::make_pair(std::move(out), std::move(reps));
    };
    auto store = [&](std::size_t i, const MetricScore& score, const MatchReport* rep) {
      results.at(s.metric)[i] = score;
      if (rep) reports[i] = *rep;
      if (!cache) return;
      const auto& p = dataset.pairs[i].pair;
      cache->put(key(s, p), score);
      if (rep) {
        const double vals[] = {rep->precision, rep->recall, rep->raw_f1};
        for (std::size_t f = 0; f < 3; ++f)
          cache->put(key(s, p, std::string("#") + kDetailFields[f]), MetricScore{p.id, s.metric, clamp01(vals[f]), vals[f], fingerprint(s)});
      }
    };
    try {
      auto [out, reps] = batch(pairs);
      for (std::size_t k = 0; k < idx.size(); ++k) store(idx[k], out[k], reps.empty() ? nullptr : &reps[k]);
      return;
    } catch (const std::exception&) {
      // Retried pair by pair below to isolate the failing inputs.
    }
    for (std::size_t k = 0; k < idx.size(); ++k) {
      try {
        auto [out, reps] = batch(std::span<const SentencePair>(&pairs[k], 1));
        store(idx[k], out[0], reps.empty() ? nullptr : &reps[0]);
      } catch (const Error& e) {
        record_failure(pairs[k], s.metric, std::string(to_string(e.code())) + ": " + e.what());
      } catch (const std::exception& e) {
        record_failure(pairs[k], s.metric, e.what());
      }
    }
  }

  void process_chunk(std::size_t begin, std::size_t end) {
    for (const auto& s : setups) {
      std::vector<std::size_t> todo;
      for (std::size_t i = begin; i < end; ++i) {
        const auto& p = dataset.pairs[i].pair;
        std::optional<MetricScore> hit;
        if (cache) hit = cache->get(key(s, p));
        std::optional<MatchReport> rep;
        if (hit && s.metric == MetricId::bertscore) {
          std::optional<MetricScore> parts[3];
          for (std::size_t f = 0; f < 3; ++f) parts[f] = cache->get(key(s, p, std::string("#") + kDetailFields[f]));
          if (parts[0] && parts[1] && parts[2]) rep = MatchReport{parts[0]->raw, parts[1]->raw, hit->score, parts[2]->raw};
          else hit.reset();
        }
        if (hit) {
          // Entries are keyed by content, so another pair with the same texts
          // may have stored it; the value is reused under this pair's id.
          hit->pair_id = p.id;
          results.at(s.metric)[i] = *hit;
          if (rep) reports[i] = *rep;
          ++hits;
        } else {
          todo.push_back(i);
        }
      }
      if (!todo.empty()) {
        misses += todo.size();
        compute(s, todo);
      }
    }
  }

  void run(std::size_t workers) {
    const std::size_t n = dataset.size();
    for (const auto& s : setups) results[s.metric].assign(n, std::nullopt);
    reports.assign(n, std::nullopt);
    const std::size_t chunk = std::max<std::size_t>(1, options.batch_size);
    const std::size_t chunks = (n + chunk - 1) / chunk;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t c = next++; c < chunks; c = next++) process_chunk(c * chunk, std::min(n, (c + 1) * chunk));
    };
    const std::size_t threads = std::max<std::size_t>(1, std::min(workers, chunks));
    if (threads == 1) {
      worker();
      return;
    }
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
};

nlohmann::ordered_json bundle_json(const ModelBundle& b) {
  const auto& c = b.config();
  nlohmann::ordered_json j;
  j["path"] = b.directory().string();
  j["fingerprint"] = b.fingerprint();
  j["checkpoint"] = c.checkpoint;
  j["kind"] = to_string(c.kind);
  j["runtime"] = c.runtime;
  j["max_len"] = c.max_len;
  j["output_scale"] = c.output_scale;
  j["rescale_baseline"] = c.rescale_baseline ? nlohmann::ordered_json(*c.rescale_baseline) : nlohmann::ordered_json();
  j["embedding_layer"] = c.embedding_layer ? nlohmann::ordered_json(*c.embedding_layer) : nlohmann::ordered_json("last");
  j["idf"] = c.idf;
  j["pool_special_tokens"] = c.pool_special_tokens;
  return j;
}

nlohmann::ordered_json correlation_json(const CorrelationReport& c) {
  nlohmann::ordered_json j;
  j["n"] = c.n;
  j["pearson_r"] = c.pearson_r ? nlohmann::ordered_json(*c.pearson_r) : nlohmann::ordered_json();
  j["spearman_rho"] = c.spearman_rho ? nlohmann::ordered_json(*c.spearman_rho) : nlohmann::ordered_json();
  return j;
}

nlohmann::ordered_json class_json(const ClassSummary& c) {
  return nlohmann::ordered_json{{"class", c.class_label}, {"mean", c.mean}, {"std", c.std}, {"n", c.n}};
}

nlohmann::ordered_json metric_summary_json(const MetricSummary& s) {
  nlohmann::ordered_json j;
  j["n"] = s.n;
  if (s.correlation) j["correlation"] = correlation_json(*s.correlation);
  if (s.classes) {
    j["neg"] = class_json(s.classes->first);
    j["pos"] = class_json(s.classes->second);
  }
  if (s.roc) {
    j["auc"] = s.roc->auc;
    auto pts = nlohmann::ordered_json::array();
    for (const auto& p : s.roc->points) pts.push_back({p.fpr, p.tpr});
    j["roc"] = std::move(pts);
  }
  if (!s.error.empty()) j["error"] = s.error;
  return j;
}

std::vector<MetricSummary> summarize_all(std::span<const MetricId> metrics, const LabeledDataset& dataset,
                                         std::span<const MetricScore> scores) {
  std::vector<MetricSummary> out;
  for (auto m : metrics) out.push_back(summarize(m, dataset, scores));
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += "\"\"";
    else q.push_back(c);
  }
  return q + "\"";
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io_error, "cannot write " + path.string());
  out << content;
  if (!out) fail(Errc::io_error, "write failed for " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::missing_file, "cannot read " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

BundleSet BundleSet::from_directory(const std::filesystem::path& root, std::span<const MetricId> metrics) {
  BundleSet set;
  for (auto m : required_metrics(metrics)) {
    if (!is_model_metric(m)) continue;
    const auto dir = root / std::string(to_string(m));
    if (!std::filesystem::is_directory(dir))
      fail(Errc::bundle_missing, "no bundle for metric " + std::string(to_string(m)) + " at " + dir.string());
    auto bundle = load_bundle(dir);
    const auto want = m == MetricId::sts ? BundleKind::regression_pair : BundleKind::encoder;
    if (bundle.kind() != want)
      fail(Errc::malformed_config, "bundle " + dir.string() + " has kind " + std::string(to_string(bundle.kind())) +
                                       ", metric " + std::string(to_string(m)) + " needs " + std::string(to_string(want)));
    (m == MetricId::sts ? set.sts : m == MetricId::sbert ? set.sbert : set.bertscore) = std::move(bundle);
  }
  return set;
}

const ModelBundle* BundleSet::get(MetricId metric) const {
  switch (metric) {
    case MetricId::sts: return sts ? &*sts : nullptr;
    case MetricId::sbert: return sbert ? &*sbert : nullptr;
    case MetricId::bertscore: return bertscore ? &*bertscore : nullptr;
    default: return nullptr;
  }
}

std::vector<MetricId> required_metrics(std::span<const MetricId> requested) {
  std::vector<MetricId> out;
  for (auto m : kAllMetrics) {
    if (m == MetricId::ensemble) continue;
    const bool direct = std::find(requested.begin(), requested.end(), m) != requested.end();
    const bool via_ensemble = is_model_metric(m) &&
                              std::find(requested.begin(), requested.end(), MetricId::ensemble) != requested.end();
    if (direct || via_ensemble) out.push_back(m);
  }
  return out;
}

MetricSummary summarize(MetricId metric, const LabeledDataset& dataset, std::span<const MetricScore> scores) {
  std::map<std::string, double> by_id;
  for (const auto& s : scores)
    if (s.metric == metric) by_id[s.pair_id] = s.score;
  std::vector<double> xs, labels;
  for (const auto& lp : dataset.pairs) {
    auto it = by_id.find(lp.pair.id);
    if (it == by_id.end()) continue;
    xs.push_back(it->second);
    labels.push_back(lp.label.value);
  }
  MetricSummary s;
  s.metric = metric;
  s.n = xs.size();
  try {
    if (dataset.label_kind() == LabelKind::binary) {
      s.classes = class_summary(xs, labels);
      s.roc = roc_auc(xs, labels);
    } else {
      s.correlation = correlate(xs, labels);
    }
  } catch (const Error& e) {
    s.error = std::string(to_string(e.code())) + ": " + e.what();
  }
  return s;
}

BenchmarkRun run_benchmark(const DatasetSource& source, std::span<const MetricId> metrics, const BundleSet& bundles,
                           const RunOptions& options) {
  std::vector<MetricId> requested;
  for (auto m : kAllMetrics)
    if (std::find(metrics.begin(), metrics.end(), m) != metrics.end()) requested.push_back(m);
  const auto needed = required_metrics(requested);
  for (auto m : needed)
    if (is_model_metric(m) && !bundles.get(m))
      fail(Errc::bundle_missing, "no bundle loaded for metric " + std::string(to_string(m)));

  LoadStats load_stats;
  LabeledDataset full = load_dataset(source, &load_stats);
  if (full.pairs.empty()) fail(Errc::parse_error, "dataset " + source.path.string() + " contains no pairs");
  LabeledDataset dataset = options.subset_n ? subset(full, *options.subset_n, options.seed, options.stratify) : full;

  std::vector<MetricSetup> setups;
  for (auto m : needed) setups.push_back(make_setup(m, bundles, dataset, options));

  std::optional<ScoreCache> cache;
  if (options.cache_dir) cache.emplace(*options.cache_dir);

  std::uint64_t calls_before = 0;
  for (auto m : needed)
    if (const auto* b = bundles.get(m)) calls_before += b->inference_calls();

  Scorer scorer{setups, dataset, cache, options, {}, {}, {}, {}, {}, {}};
  const std::size_t workers = options.workers ? options.workers : std::max(1u, std::thread::hardware_concurrency());
  scorer.run(workers);

  BenchmarkRun run;
  run.source = source;
  run.dataset = dataset;
  run.metrics = requested;
  const bool want_ensemble = std::find(requested.begin(), requested.end(), MetricId::ensemble) != requested.end();
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (auto m : requested) {
      if (m == MetricId::ensemble) continue;
      if (const auto& s = scorer.results[m][i]) run.scores.push_back(*s);
    }
    if (want_ensemble) {
      const auto& sts = scorer.results[MetricId::sts][i];
      const auto& sbert = scorer.results[MetricId::sbert][i];
      const auto& bert = scorer.results[MetricId::bertscore][i];
      if (sts && sbert && bert) {
        const MetricScore parts[] = {*sts, *sbert, *bert};
        run.scores.push_back(ensemble_score(parts));
      } else {
        scorer.failures.push_back({dataset.pairs[i].pair.id, MetricId::ensemble, "missing-component: a component score failed"});
      }
    }
    if (std::find(requested.begin(), requested.end(), MetricId::bertscore) != requested.end() && scorer.reports[i])
      run.match_reports.emplace_back(dataset.pairs[i].pair.id, *scorer.reports[i]);
  }
  // Failures are reported in dataset order regardless of worker scheduling.
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < dataset.size(); ++i) position.emplace(dataset.pairs[i].pair.id, i);
  std::stable_sort(scorer.failures.begin(), scorer.failures.end(), [&](const PairFailure& a, const PairFailure& b) {
    return std::make_pair(position[a.pair_id], static_cast<int>(a.metric)) < std::make_pair(position[b.pair_id], static_cast<int>(b.metric));
  });
  run.failures = std::move(scorer.failures);
  run.partial = !run.failures.empty();
  run.cache_hits = scorer.hits;
  run.cache_misses = scorer.misses;
  for (auto m : needed)
    if (const auto* b = bundles.get(m)) run.inference_calls += b->inference_calls();
  run.inference_calls -= calls_before;

  run.summaries = summarize_all(run.metrics, dataset, run.scores);
  if (options.length_split) {
    const auto split = median_length_split(dataset);
    LengthSplitSummary ls;
    ls.median = split.median;
    ls.shorter_n = split.shorter.size();
    ls.longer_n = split.longer.size();
    ls.shorter = summarize_all(run.metrics, split.shorter, run.scores);
    ls.longer = summarize_all(run.metrics, split.longer, run.scores);
    run.length_split = std::move(ls);
  }

  // Manifest: configuration and provenance; deterministic except for timestamps and execution counters.
  Sha256 config_digest;
  config_digest.update_field(to_string(source.kind)).update_field(source.split);
  for (const auto& s : setups) config_digest.update_field(to_string(s.metric)).update_field(s.config_hash).update_field(s.bundle ? s.bundle->fingerprint() : "");
  config_digest.update_field(options.subset_n ? std::to_string(*options.subset_n) : "all")
      .update_field(std::to_string(options.seed))
      .update_field(options.stratify ? "stratify" : "random")
      .update_field(options.length_split ? "length-split" : "no-length-split");
  const std::string config_hash = to_hex(config_digest.finish());

  run.run_id = options.run_id.empty()
                   ? std::string(to_string(source.kind)) + "-" + utc_timestamp("%Y%m%dT%H%M%SZ") + "-" + config_hash.substr(0, 8)
                   : options.run_id;

  auto& m = run.manifest;
  m["run_id"] = run.run_id;
  m["tool_version"] = kToolVersion;
  m["created_at"] = utc_timestamp("%Y-%m-%dT%H:%M:%SZ");
  m["config_hash"] = config_hash;
  nlohmann::ordered_json ds;
  ds["kind"] = to_string(source.kind);
  ds["name"] = to_string(dataset.name);
  ds["path"] = source.path.string();
  ds["split"] = source.split;
  ds["label_kind"] = to_string(dataset.label_kind());
  ds["format"] = load_stats.format;
  ds["rows_read"] = load_stats.rows_read;
  ds["pairs_loaded"] = load_stats.pairs;
  ds["skipped_unscored"] = load_stats.skipped_unscored;
  ds["skipped_empty"] = load_stats.skipped_empty;
  ds["pairs_scored"] = dataset.size();
  ds["file_sha256"] = sha256_file_hex(source.path);
  m["dataset"] = std::move(ds);
  auto metric_names = nlohmann::ordered_json::array();
  for (auto id : run.metrics) metric_names.push_back(to_string(id));
  m["metrics"] = std::move(metric_names);
  nlohmann::ordered_json opts;
  opts["subset"] = options.subset_n ? nlohmann::ordered_json{{"n", *options.subset_n}, {"seed", options.seed}, {"stratify", options.stratify}}
                                    : nlohmann::ordered_json();
  opts["length_split"] = options.length_split;
  opts["batch_size"] = options.batch_size;
  m["options"] = std::move(opts);
  nlohmann::ordered_json bundle_info = nlohmann::ordered_json::object();
  for (auto id : needed)
    if (const auto* b = bundles.get(id)) bundle_info[std::string(to_string(id))] = bundle_json(*b);
  m["bundles"] = std::move(bundle_info);
  nlohmann::ordered_json decisions;
  decisions["sts_clamp"] = options.clamp_sts;
  decisions["length_convention"] = "mean of the two texts' code-point counts; shorter = strictly below median";
  decisions["bleu_direction"] = "reference=text_a, candidate=text_b";
  decisions["bleu_tokenizer"] = "13a";
  decisions["bleu_smoothing"] = "none";
  decisions["bertscore_reference"] = "text_a";
  decisions["std_divisor"] = "n-1";
  decisions["table_rounding"] = "half-up, 2 decimals";
  m["decisions"] = std::move(decisions);
  m["partial"] = run.partial;
  auto fails = nlohmann::ordered_json::array();
  for (const auto& f : run.failures)
    fails.push_back(nlohmann::ordered_json{{"pair_id", f.pair_id}, {"metric", to_string(f.metric)}, {"error", f.error}});
  m["failures"] = std::move(fails);
  m["execution"] = nlohmann::ordered_json{{"inference_calls", run.inference_calls},
                                          {"cache_hits", run.cache_hits},
                                          {"cache_misses", run.cache_misses},
                                          {"cache_dir", options.cache_dir ? options.cache_dir->string() : std::string()}};
  return run;
}

nlohmann::ordered_json summary_json(const BenchmarkRun& run) {
  nlohmann::ordered_json j;
  j["run_id"] = run.run_id;
  j["dataset"] = to_string(run.dataset.name);
  j["label_kind"] = to_string(run.label_kind());
  j["n"] = run.dataset.size();
  j["partial"] = run.partial;
  nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
  for (const auto& s : run.summaries) metrics[std::string(to_string(s.metric))] = metric_summary_json(s);
  j["metrics"] = std::move(metrics);
  if (run.length_split) {
    const auto& ls = *run.length_split;
    nlohmann::ordered_json shorter = nlohmann::ordered_json::object(), longer = nlohmann::ordered_json::object();
    for (const auto& s : ls.shorter) shorter[std::string(to_string(s.metric))] = metric_summary_json(s);
    for (const auto& s : ls.longer) longer[std::string(to_string(s.metric))] = metric_summary_json(s);
    j["length_split"] = nlohmann::ordered_json{{"median", ls.median},
                                               {"shorter", {{"n", ls.shorter_n}, {"metrics", std::move(shorter)}}},
                                               {"longer", {{"n", ls.longer_n}, {"metrics", std::move(longer)}}}};
  } else {
    j["length_split"] = nullptr;
  }
  return j;
}

std::string scores_csv(std::span<const MetricScore> scores) {
  std::string out = "pair_id,metric,score,raw,model_fingerprint\n";
  for (const auto& s : scores) {
    out += csv_field(s.pair_id) + "," + std::string(to_string(s.metric)) + "," + format_number(s.score) + "," +
           format_number(s.raw) + "," + csv_field(s.model_fingerprint) + "\n";
  }
  return out;
}

std::vector<MetricScore> parse_scores_csv(const std::string& content) {
  std::vector<MetricScore> out;
  std::size_t i = 0;
  std::size_t line = 0;
  auto read_record = [&]() {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    while (i < content.size()) {
      const char c = content[i++];
      if (quoted) {
        if (c == '"' && i < content.size() && content[i] == '"') field.push_back('"'), ++i;
        else if (c == '"') quoted = false;
        else field.push_back(c);
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
      } else if (c == '\n') {
        break;
      } else if (c != '\r') {
        field.push_back(c);
      }
    }
    fields.push_back(std::move(field));
    ++line;
    return fields;
  };
  const auto header = read_record();
  if (header != std::vector<std::string>{"pair_id", "metric", "score", "raw", "model_fingerprint"})
    fail(Errc::parse_error, "scores.csv: unexpected header");
  while (i < content.size()) {
    const auto f = read_record();
    if (f.size() == 1 && f[0].empty()) continue;
    if (f.size() != 5) fail(Errc::parse_error, "scores.csv:" + std::to_string(line) + ": expected 5 fields");
    const auto metric = parse_metric(f[1]);
    if (!metric) fail(Errc::parse_error, "scores.csv:" + std::to_string(line) + ": unknown metric '" + f[1] + "'");
    try {
      out.push_back(MetricScore{f[0], *metric, std::stod(f[2]), std::stod(f[3]), f[4]});
    } catch (const std::exception&) {
      fail(Errc::parse_error, "scores.csv:" + std::to_string(line) + ": invalid number");
    }
  }
  return out;
}

std::filesystem::path save_run(const BenchmarkRun& run, const std::filesystem::path& out_root) {
  namespace fs = std::filesystem;
  const fs::path dir = out_root / "runs" / run.run_id;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(Errc::io_error, "cannot create run directory " + dir.string() + ": " + ec.message());
  const fs::path lock = dir / ".lock";
  std::FILE* lf = std::fopen(lock.c_str(), "wx");
  if (!lf) fail(Errc::io_error, "run directory " + dir.string() + " is locked by another writer");
  std::fclose(lf);
  struct Unlock {
    fs::path p;
    ~Unlock() {
      std::error_code ignored;
      fs::remove(p, ignored);
    }
  } unlock{lock};
  if (fs::exists(dir / "manifest.json")) fail(Errc::io_error, "run " + run.run_id + " already exists; runs are append-only");

  write_file(dir / "scores.csv", scores_csv(run.scores));
  write_file(dir / "pairs.jsonl", to_canonical_jsonl(run.dataset));
  std::string details;
  for (const auto& [id, r] : run.match_reports) {
    nlohmann::ordered_json j{{"pair_id", id}, {"metric", "bertscore"}, {"precision", r.precision},
                             {"recall", r.recall},  {"f1", r.f1},              {"raw_f1", r.raw_f1}};
    details += j.dump() + "\n";
  }
  write_file(dir / "details.jsonl", details);
  write_file(dir / "summary.json", summary_json(run).dump(2) + "\n");
  emit_figures(run, dir / "figures");
  auto manifest = run.manifest;
  manifest["finished_at"] = utc_timestamp("%Y-%m-%dT%H:%M:%SZ");
  // The manifest goes last: its presence marks the run complete.
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  return dir;
}

BenchmarkRun load_run(const std::filesystem::path& run_dir) {
  BenchmarkRun run;
  try {
    run.manifest = nlohmann::ordered_json::parse(read_file(run_dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse_error, "manifest.json: " + std::string(e.what()));
  }
  const auto& m = run.manifest;
  try {
    run.run_id = m.at("run_id").get<std::string>();
    const auto& ds = m.at("dataset");
    const auto kind = parse_source_kind(ds.at("kind").get<std::string>());
    if (!kind) fail(Errc::parse_error, "manifest.json: unknown dataset kind");
    run.source = DatasetSource{*kind, ds.at("path").get<std::string>(), ds.at("split").get<std::string>(), false};
    for (const auto& name : m.at("metrics")) {
      const auto id = parse_metric(name.get<std::string>());
      if (!id) fail(Errc::parse_error, "manifest.json: unknown metric");
      run.metrics.push_back(*id);
    }
    run.partial = m.value("partial", false);
    for (const auto& f : m.value("failures", nlohmann::ordered_json::array()))
      run.failures.push_back({f.at("pair_id").get<std::string>(), parse_metric(f.at("metric").get<std::string>()).value_or(MetricId::bleu),
                              f.at("error").get<std::string>()});
    const auto name = parse_dataset_name(ds.at("name").get<std::string>());
    std::vector<nlohmann::json> records;
    std::istringstream pairs(read_file(run_dir / "pairs.jsonl"));
    std::string line;
    while (std::getline(pairs, line))
      if (!line.empty()) records.push_back(nlohmann::json::parse(line));
    run.dataset = from_canonical(records, name.value_or(DatasetName::custom));
    if (records.empty()) run.dataset.split = run.source.split;
    std::istringstream details(read_file(run_dir / "details.jsonl"));
    while (std::getline(details, line)) {
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      run.match_reports.emplace_back(j.at("pair_id").get<std::string>(),
                                     MatchReport{j.at("precision").get<double>(), j.at("recall").get<double>(),
                                                 j.at("f1").get<double>(), j.at("raw_f1").get<double>()});
    }
    const bool length_split = m.at("options").value("length_split", false);
    run.scores = parse_scores_csv(read_file(run_dir / "scores.csv"));
    run.summaries = summarize_all(run.metrics, run.dataset, run.scores);
    if (length_split && !run.dataset.pairs.empty()) {
      const auto split = median_length_split(run.dataset);
      run.length_split = LengthSplitSummary{split.median, split.shorter.size(), split.longer.size(),
                                            summarize_all(run.metrics, split.shorter, run.scores),
                                            summarize_all(run.metrics, split.longer, run.scores)};
    }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse_error, "run " + run_dir.string() + ": " + e.what());
  }
  return run;
}

}  // namespace stsscore
