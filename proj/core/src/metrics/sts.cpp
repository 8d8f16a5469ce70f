#include "stsscore/metrics/sts.hpp"

#include <array>

#include "stsscore/error.hpp"
#include "stsscore/hash.hpp"

namespace stsscore {

StsConfig StsConfig::from_bundle(ModelBundle bundle, bool clamp) {
  const double scale = bundle.config().output_scale;
  return StsConfig{std::move(bundle), scale, clamp};
}

MetricScore sts_score(const StsConfig& config, const SentencePair& pair) {
  return sts_score_batch(config, std::span<const SentencePair>(&pair, 1)).front();
}

std::vector<MetricScore> sts_score_batch(const StsConfig& config, std::span<const SentencePair> pairs,
                                         std::size_t batch_size) {
  if (!(config.scale > 0.0)) fail(Errc::invalid_argument, "STS scale must be positive");
  std::vector<EncodedInput> encoded;
  encoded.reserve(pairs.size());
  for (const auto& p : pairs) encoded.push_back(config.bundle.tokenize_pair(p.text_a, p.text_b));
  const auto logits = config.bundle.run_regression_batch(encoded, batch_size);
  std::vector<MetricScore> out;
  out.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double raw = logits[i] / config.scale;
    out.push_back(MetricScore{pairs[i].id, MetricId::sts, config.clamp ? clamp01(raw) : raw, raw,
                              config.bundle.fingerprint()});
  }
  return out;
}

MetricScore ensemble_score(std::span<const MetricScore> scores) {
  constexpr std::array<MetricId, 3> parts = {MetricId::sts, MetricId::sbert, MetricId::bertscore};
  std::array<const MetricScore*, 3> found{};
  for (const auto& s : scores) {
    bool placed = false;
    for (std::size_t k = 0; k < parts.size(); ++k) {
      if (s.metric != parts[k]) continue;
      if (found[k]) fail(Errc::missing_component, "ensemble input has two " + std::string(to_string(s.metric)) + " scores");
      found[k] = &s;
      placed = true;
    }
    if (!placed) fail(Errc::missing_component, "ensemble does not take " + std::string(to_string(s.metric)) + " scores");
  }
  for (std::size_t k = 0; k < parts.size(); ++k)
    if (!found[k]) fail(Errc::missing_component, "ensemble is missing the " + std::string(to_string(parts[k])) + " score");
  const std::string& id = found[0]->pair_id;
  if (found[1]->pair_id != id || found[2]->pair_id != id)
    fail(Errc::pair_id_mismatch, "ensemble inputs belong to different pairs");

  const double mean = (clamp01(found[0]->score) + clamp01(found[1]->score) + clamp01(found[2]->score)) / 3.0;
  Sha256 h;
  for (const auto* s : found) h.update_field(to_string(s->metric)).update_field(s->model_fingerprint);
  return MetricScore{id, MetricId::ensemble, mean, mean, to_hex(h.finish())};
}

}  // namespace stsscore
