#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "stsscore/backend/model.hpp"
#include "stsscore/types.hpp"

namespace stsscore {

// dot(u,v)/(‖u‖‖v‖). Throws zero_vector for a zero or non-finite input and
// length_mismatch for unequal dimensions.
double cosine(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

struct MatchReport {
  double precision = 0.0;  // after optional rescaling, before clamping
  double recall = 0.0;     // after optional rescaling, before clamping
  double f1 = 0.0;         // reported value, in [0,1]
  double raw_f1 = 0.0;     // 2PR/(P+R) before rescaling and clamping

  bool operator==(const MatchReport&) const = default;
};

// Inverse document frequency over a reference corpus:
// idf(t) = ln((M+1)/(df(t)+1)) with M documents; unseen tokens get ln(M+1).
class IdfTable {
 public:
  static IdfTable from_corpus(const Tokenizer& tokenizer, std::span<const std::string> documents);

  double weight(std::int32_t token_id) const;
  std::size_t documents() const { return documents_; }

 private:
  std::unordered_map<std::int32_t, double> idf_;
  std::size_t documents_ = 0;
  double unseen_ = 0.0;
};

// Greedy token matching of eligible (unmasked, non-special) rows:
// recall = mean over reference rows of their best cosine against candidate rows,
// precision = mean over candidate rows of their best cosine against reference
// rows, optionally IDF-weighted. With a baseline b, P, R and F1 are mapped
// x → (x−b)/(1−b). Throws all_tokens_excluded if either side has no eligible row.
MatchReport greedy_match(const TokenEmbeddings& reference, const TokenEmbeddings& candidate,
                         std::optional<double> baseline = std::nullopt, const IdfTable* idf = nullptr);

// Token matching with text_a as reference and text_b as candidate, using the
// bundle's encoder layer and rescaling baseline.
MatchReport token_match_score(const ModelBundle& bundle, const SentencePair& pair, const IdfTable* idf = nullptr);

// MetricScore view of a match: score = f1, raw = F1 after rescaling, before clamping.
MetricScore bertscore_score(const ModelBundle& bundle, const SentencePair& pair, const IdfTable* idf = nullptr);
MetricScore to_metric_score(const MatchReport& report, const ModelBundle& bundle, std::string pair_id);

// raw = cosine of the mean-pooled token vectors; score = clamp(raw, 0, 1).
MetricScore sbert_score(const ModelBundle& bundle, const SentencePair& pair);

// Batched forms; texts are encoded in groups of batch_size.
std::vector<MetricScore> sbert_score_batch(const ModelBundle& bundle, std::span<const SentencePair> pairs,
                                           std::size_t batch_size = kDefaultBatchSize);
std::vector<MatchReport> token_match_batch(const ModelBundle& bundle, std::span<const SentencePair> pairs,
                                           const IdfTable* idf = nullptr, std::size_t batch_size = kDefaultBatchSize);

}  // namespace stsscore
