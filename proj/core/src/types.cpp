#include "stsscore/types.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include <nlohmann/json.hpp>

#include "stsscore/error.hpp"

namespace stsscore {

std::string_view to_string(LabelKind kind) {
  switch (kind) {
    case LabelKind::similarity_0_5: return "similarity_0_5";
    case LabelKind::binary: return "binary";
    case LabelKind::mqm: return "mqm";
  }
  return "";
}

std::string_view to_string(DatasetName name) {
  switch (name) {
    case DatasetName::stsb: return "stsb";
    case DatasetName::mrpc: return "mrpc";
    case DatasetName::qqp: return "qqp";
    case DatasetName::wmt22_zh_en: return "wmt22_zh_en";
    case DatasetName::custom: return "custom";
  }
  return "";
}

std::string_view to_string(MetricId metric) {
  switch (metric) {
    case MetricId::bleu: return "bleu";
    case MetricId::bertscore: return "bertscore";
    case MetricId::sbert: return "sbert";
    case MetricId::sts: return "sts";
    case MetricId::ensemble: return "ensemble";
  }
  return "";
}

std::optional<LabelKind> parse_label_kind(std::string_view text) {
  for (auto k : {LabelKind::similarity_0_5, LabelKind::binary, LabelKind::mqm})
    if (to_string(k) == text) return k;
  return std::nullopt;
}

std::optional<DatasetName> parse_dataset_name(std::string_view text) {
  for (auto n : {DatasetName::stsb, DatasetName::mrpc, DatasetName::qqp, DatasetName::wmt22_zh_en,
                 DatasetName::custom})
    if (to_string(n) == text) return n;
  return std::nullopt;
}

std::optional<MetricId> parse_metric(std::string_view text) {
  for (auto m : kAllMetrics)
    if (to_string(m) == text) return m;
  return std::nullopt;
}

LabelKind LabeledDataset::label_kind() const {
  return pairs.empty() ? LabelKind::similarity_0_5 : pairs.front().label.kind;
}

double clamp01(double value) { return std::clamp(value, 0.0, 1.0); }

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

void to_json(nlohmann::json& j, const SentencePair& p) {
  j = nlohmann::json{{"id", p.id}, {"text_a", p.text_a}, {"text_b", p.text_b}};
}

void from_json(const nlohmann::json& j, SentencePair& p) {
  j.at("id").get_to(p.id);
  j.at("text_a").get_to(p.text_a);
  j.at("text_b").get_to(p.text_b);
}

void to_json(nlohmann::json& j, const Label& l) {
  j = nlohmann::json{{"kind", to_string(l.kind)}, {"value", l.value}};
}

void from_json(const nlohmann::json& j, Label& l) {
  auto kind = parse_label_kind(j.at("kind").get<std::string>());
  if (!kind) fail(Errc::schema_violation, "unknown label kind");
  l.kind = *kind;
  j.at("value").get_to(l.value);
}

void to_json(nlohmann::json& j, const LabeledDataset& d) {
  auto pairs = nlohmann::json::array();
  for (const auto& lp : d.pairs) pairs.push_back({{"pair", lp.pair}, {"label", lp.label}});
  j = nlohmann::json{{"name", to_string(d.name)}, {"split", d.split}, {"pairs", std::move(pairs)}};
}

void from_json(const nlohmann::json& j, LabeledDataset& d) {
  auto name = parse_dataset_name(j.at("name").get<std::string>());
  if (!name) fail(Errc::schema_violation, "unknown dataset name");
  d.name = *name;
  j.at("split").get_to(d.split);
  d.pairs.clear();
  for (const auto& item : j.at("pairs"))
    d.pairs.push_back({item.at("pair").get<SentencePair>(), item.at("label").get<Label>()});
}

void to_json(nlohmann::json& j, const MetricScore& s) {
  j = nlohmann::json{{"pair_id", s.pair_id},
                     {"metric", to_string(s.metric)},
                     {"score", s.score},
                     {"raw", s.raw},
                     {"model_fingerprint", s.model_fingerprint}};
}

void from_json(const nlohmann::json& j, MetricScore& s) {
  j.at("pair_id").get_to(s.pair_id);
  auto metric = parse_metric(j.at("metric").get<std::string>());
  if (!metric) fail(Errc::schema_violation, "unknown metric");
  s.metric = *metric;
  j.at("score").get_to(s.score);
  j.at("raw").get_to(s.raw);
  j.at("model_fingerprint").get_to(s.model_fingerprint);
}

}  // namespace stsscore
