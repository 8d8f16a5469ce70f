#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace stsscore {

enum class LabelKind { similarity_0_5, binary, mqm };
enum class DatasetName { stsb, mrpc, qqp, wmt22_zh_en, custom };
enum class MetricId { bleu, bertscore, sbert, sts, ensemble };

std::string_view to_string(LabelKind kind);
std::string_view to_string(DatasetName name);
std::string_view to_string(MetricId metric);
std::optional<LabelKind> parse_label_kind(std::string_view text);
std::optional<DatasetName> parse_dataset_name(std::string_view text);
std::optional<MetricId> parse_metric(std::string_view text);

// Canonical order used for table rows: bleu, bertscore, sbert, sts, ensemble.
inline constexpr MetricId kAllMetrics[] = {MetricId::bleu, MetricId::bertscore, MetricId::sbert,
                                           MetricId::sts, MetricId::ensemble};

struct SentencePair {
  std::string id;
  std::string text_a;
  std::string text_b;

  bool operator==(const SentencePair&) const = default;
};

struct Label {
  LabelKind kind = LabelKind::similarity_0_5;
  double value = 0.0;

  bool operator==(const Label&) const = default;
};

struct LabeledPair {
  SentencePair pair;
  Label label;

  bool operator==(const LabeledPair&) const = default;
};

struct LabeledDataset {
  DatasetName name = DatasetName::custom;
  std::string split;
  std::vector<LabeledPair> pairs;

  // Kind of the first label; similarity_0_5 for an empty dataset.
  LabelKind label_kind() const;
  std::size_t size() const { return pairs.size(); }

  bool operator==(const LabeledDataset&) const = default;
};

// One metric's output for one pair. `score` is always in [0,1]; `raw` is the
// value before clamping.
struct MetricScore {
  std::string pair_id;
  MetricId metric = MetricId::bleu;
  double score = 0.0;
  double raw = 0.0;
  std::string model_fingerprint;

  bool operator==(const MetricScore&) const = default;
};

double clamp01(double value);

// Shortest decimal string that parses back to exactly `value`.
std::string format_number(double value);

void to_json(nlohmann::json& j, const SentencePair& p);
void from_json(const nlohmann::json& j, SentencePair& p);
void to_json(nlohmann::json& j, const Label& l);
void from_json(const nlohmann::json& j, Label& l);
void to_json(nlohmann::json& j, const LabeledDataset& d);
void from_json(const nlohmann::json& j, LabeledDataset& d);
void to_json(nlohmann::json& j, const MetricScore& s);
void from_json(const nlohmann::json& j, MetricScore& s);

}  // namespace stsscore
