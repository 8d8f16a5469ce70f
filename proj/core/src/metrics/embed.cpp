#include "stsscore/metrics/embed.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "stsscore/error.hpp"

namespace stsscore {

namespace {

void require_encoder(const ModelBundle& bundle) {
  if (bundle.kind() != BundleKind::encoder) fail(Errc::invalid_argument, "embedding metrics need an encoder bundle");
}

// Unit-normalised eligible rows plus their token ids.
struct Eligible {
  Eigen::MatrixXd rows;
  std::vector<std::int32_t> ids;
};

Eligible eligible_rows(const TokenEmbeddings& emb) {
  std::vector<Eigen::Index> keep;
  for (std::size_t r = 0; r < emb.rows(); ++r)
    if (emb.eligible(r)) keep.push_back(static_cast<Eigen::Index>(r));
  if (keep.empty()) fail(Errc::all_tokens_excluded, "text has no eligible tokens for matching");
  Eligible e;
  e.rows.resize(static_cast<Eigen::Index>(keep.size()), emb.vectors.cols());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const auto row = emb.vectors.row(keep[i]);
    const double norm = row.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) fail(Errc::zero_vector, "token vector has zero or non-finite norm");
    e.rows.row(static_cast<Eigen::Index>(i)) = row / norm;
    e.ids.push_back(emb.token_ids[static_cast<std::size_t>(keep[i])]);
  }
  return e;
}

double weighted_mean(const Eigen::VectorXd& values, const std::vector<std::int32_t>& ids, const IdfTable* idf) {
  if (!idf) return values.mean();
  double num = 0.0, den = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double w = idf->weight(ids[static_cast<std::size_t>(i)]);
    num += w * values(i);
    den += w;
  }
  return den > 0.0 ? num / den : values.mean();
}

double rescale(double x, std::optional<double> baseline) { return baseline ? (x - *baseline) / (1.0 - *baseline) : x; }

}  // namespace

double cosine(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  if (u.size() != v.size()) fail(Errc::length_mismatch, "cosine of vectors with different dimensions");
  const double nu = u.norm();
  const double nv = v.norm();
  if (!(nu > 0.0) || !(nv > 0.0) || !std::isfinite(nu) || !std::isfinite(nv))
    fail(Errc::zero_vector, "cosine needs nonzero finite vectors");
  const double c = u.dot(v) / (nu * nv);
  return std::clamp(c, -1.0, 1.0);
}

IdfTable IdfTable::from_corpus(const Tokenizer& tokenizer, std::span<const std::string> documents) {
  std::unordered_map<std::int32_t, std::size_t> df;
  for (const auto& doc : documents) {
    const auto ids = tokenizer.encode_ids(doc);
    for (auto id : std::set<std::int32_t>(ids.begin(), ids.end())) ++df[id];
  }
  IdfTable t;
  t.documents_ = documents.size();
  const double m1 = static_cast<double>(documents.size()) + 1.0;
  t.unseen_ = std::log(m1);
  for (const auto& [id, count] : df) t.idf_[id] = std::log(m1 / (static_cast<double>(count) + 1.0));
  return t;
}

double IdfTable::weight(std::int32_t token_id) const {
  auto it = idf_.find(token_id);
  return it == idf_.end() ? unseen_ : it->second;
}

MatchReport greedy_match(const TokenEmbeddings& reference, const TokenEmbeddings& candidate,
                         std::optional<double> baseline, const IdfTable* idf) {
  if (reference.vectors.cols() != candidate.vectors.cols())
    fail(Errc::length_mismatch, "token vectors have different dimensions");
  if (baseline && !(*baseline >= 0.0 && *baseline < 1.0))
    fail(Errc::out_of_range, "rescale baseline must lie in [0,1)");
  const Eligible ref = eligible_rows(reference);
  const Eligible cand = eligible_rows(candidate);
  const Eigen::MatrixXd sim = ref.rows * cand.rows.transpose();
  const Eigen::VectorXd best_for_ref = sim.rowwise().maxCoeff();
  const Eigen::VectorXd best_for_cand = sim.colwise().maxCoeff().transpose();
  const double recall = weighted_mean(best_for_ref, ref.ids, idf);
  const double precision = weighted_mean(best_for_cand, cand.ids, idf);
  MatchReport r;
  r.raw_f1 = precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
  r.precision = rescale(precision, baseline);
  r.recall = rescale(recall, baseline);
  r.f1 = clamp01(rescale(r.raw_f1, baseline));
  return r;
}

MatchReport token_match_score(const ModelBundle& bundle, const SentencePair& pair, const IdfTable* idf) {
  require_encoder(bundle);
  const auto ref = bundle.encode_tokens(pair.text_a);
  const auto cand = bundle.encode_tokens(pair.text_b);
  return greedy_match(ref, cand, bundle.config().rescale_baseline, idf);
}

MetricScore to_metric_score(const MatchReport& report, const ModelBundle& bundle, std::string pair_id) {
  const double raw = rescale(report.raw_f1, bundle.config().rescale_baseline);
  return MetricScore{std::move(pair_id), MetricId::bertscore, report.f1, raw, bundle.fingerprint()};
}

MetricScore bertscore_score(const ModelBundle& bundle, const SentencePair& pair, const IdfTable* idf) {
  return to_metric_score(token_match_score(bundle, pair, idf), bundle, pair.id);
}

MetricScore sbert_score(const ModelBundle& bundle, const SentencePair& pair) {
  return sbert_score_batch(bundle, std::span<const SentencePair>(&pair, 1)).front();
}

namespace {

std::vector<TokenEmbeddings> encode_pairs(const ModelBundle& bundle, std::span<const SentencePair> pairs,
                                          std::size_t batch_size) {
  std::vector<std::string> texts;
  texts.reserve(pairs.size() * 2);
  for (const auto& p : pairs) {
    texts.push_back(p.text_a);
    texts.push_back(p.text_b);
  }
  return bundle.encode_tokens_batch(texts, batch_size);
}

}  // namespace

std::vector<MetricScore> sbert_score_batch(const ModelBundle& bundle, std::span<const SentencePair> pairs,
                                           std::size_t batch_size) {
  require_encoder(bundle);
  const auto emb = encode_pairs(bundle, pairs, batch_size);
  const bool include_special = bundle.config().pool_special_tokens;
  std::vector<MetricScore> out;
  out.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double raw = cosine(mean_pool(emb[2 * i], include_special), mean_pool(emb[2 * i + 1], include_special));
    out.push_back(MetricScore{pairs[i].id, MetricId::sbert, clamp01(raw), raw, bundle.fingerprint()});
  }
  return out;
}

std::vector<MatchReport> token_match_batch(const ModelBundle& bundle, std::span<const SentencePair> pairs,
                                           const IdfTable* idf, std::size_t batch_size) {
  require_encoder(bundle);
  const auto emb = encode_pairs(bundle, pairs, batch_size);
  std::vector<MatchReport> out;
  out.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i)
    out.push_back(greedy_match(emb[2 * i], emb[2 * i + 1], bundle.config().rescale_baseline, idf));
  return out;
}

}  // namespace stsscore
