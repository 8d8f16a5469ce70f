#pragma once

#include <span>
#include <vector>

#include "stsscore/backend/model.hpp"
#include "stsscore/types.hpp"

namespace stsscore {

struct StsConfig {
  ModelBundle bundle;
  double scale = 5.0;
  bool clamp = true;

  // Scale taken from the bundle's output_scale.
  static StsConfig from_bundle(ModelBundle bundle, bool clamp = true);
};

// raw = logit / scale; score = clamp(raw, 0, 1) when clamping, else raw.
MetricScore sts_score(const StsConfig& config, const SentencePair& pair);
std::vector<MetricScore> sts_score_batch(const StsConfig& config, std::span<const SentencePair> pairs,
                                         std::size_t batch_size = kDefaultBatchSize);

// Mean of exactly one sts, one sbert and one bertscore score for the same pair.
// Errors: missing_component, pair_id_mismatch.
MetricScore ensemble_score(std::span<const MetricScore> scores);

}  // namespace stsscore
