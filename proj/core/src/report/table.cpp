#include "stsscore/report/table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "stsscore/error.hpp"

namespace stsscore {

namespace {

std::array<std::string, 2> column_names(LabelKind kind, bool ascii) {
  if (kind == LabelKind::binary) return {"neg", "pos"};
  return {"r", ascii ? "rho" : "ρ"};
}

nlohmann::ordered_json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json();
}

// Two cells plus their numeric values for one metric summary.
std::pair<std::array<std::string, 2>, nlohmann::ordered_json> cells_for(const MetricSummary* s, LabelKind kind) {
  if (!s) return {{"-", "-"}, nullptr};
  if (kind == LabelKind::binary) {
    if (!s->classes) return {{"n/a", "n/a"}, nlohmann::ordered_json{{"error", s->error}}};
    const auto& [neg, pos] = *s->classes;
    auto fmt = [](const ClassSummary& c) { return round_half_up(c.mean) + " (" + round_half_up(c.std) + ")"; };
    nlohmann::ordered_json v{{"neg_mean", neg.mean}, {"neg_std", neg.std}, {"pos_mean", pos.mean}, {"pos_std", pos.std}};
    if (s->roc) v["auc"] = s->roc->auc;
    return {{fmt(neg), fmt(pos)}, v};
  }
  if (!s->correlation) return {{"n/a", "n/a"}, nlohmann::ordered_json{{"error", s->error}}};
  const auto& c = *s->correlation;
  auto fmt = [](const std::optional<double>& v) { return v ? round_half_up(*v) : std::string("n/a"); };
  return {{fmt(c.pearson_r), fmt(c.spearman_rho)},
          nlohmann::ordered_json{{"pearson_r", opt_json(c.pearson_r)}, {"spearman_rho", opt_json(c.spearman_rho)}}};
}

const MetricSummary* find_summary(const std::vector<MetricSummary>& summaries, MetricId metric) {
  for (const auto& s : summaries)
    if (s.metric == metric) return &s;
  return nullptr;
}

void check_runs(std::span<const BenchmarkRun> runs) {
  if (runs.empty()) fail(Errc::invalid_argument, "summary table needs at least one run");
  std::set<std::tuple<std::string, std::string, int>> seen;
  for (const auto& r : runs) {
    const auto key = std::make_tuple(std::string(to_string(r.dataset.name)), r.dataset.split, static_cast<int>(r.label_kind()));
    if (!seen.insert(key).second)
      fail(Errc::incompatible_runs, "two runs cover dataset " + std::get<0>(key) + " (" + std::get<1>(key) +
                                        "); a table takes one run per dataset");
  }
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

}  // namespace

std::string round_half_up(double value, int digits) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[512];
  const auto res = std::to_chars(buf, buf + sizeof buf, std::abs(value), std::chars_format::fixed);
  std::string s(buf, res.ptr);
  const bool negative = std::signbit(value);
  std::string whole = s, frac;
  if (const auto dot = s.find('.'); dot != std::string::npos) {
    whole = s.substr(0, dot);
    frac = s.substr(dot + 1);
  }
  const auto d = static_cast<std::size_t>(std::max(digits, 0));
  bool round_up = frac.size() > d && frac[d] >= '5';
  frac = frac.substr(0, std::min(frac.size(), d));
  frac.resize(d, '0');
  std::string number = whole + frac;
  if (round_up) {
    int i = static_cast<int>(number.size()) - 1;
    while (i >= 0 && number[static_cast<std::size_t>(i)] == '9') number[static_cast<std::size_t>(i--)] = '0';
    if (i < 0) number.insert(number.begin(), '1');
    else ++number[static_cast<std::size_t>(i)];
  }
  std::string out = number.substr(0, number.size() - d);
  if (d > 0) out += "." + number.substr(number.size() - d);
  const bool zero = std::all_of(number.begin(), number.end(), [](char c) { return c == '0'; });
  return negative && !zero ? "-" + out : out;
}

std::string display_name(DatasetName name) {
  switch (name) {
    case DatasetName::stsb: return "STS-B";
    case DatasetName::mrpc: return "MRPC";
    case DatasetName::qqp: return "QQP";
    case DatasetName::wmt22_zh_en: return "WMT22-ZH-EN";
    case DatasetName::custom: return "custom";
  }
  return "custom";
}

std::string display_name(MetricId metric) {
  switch (metric) {
    case MetricId::bleu: return "BLEU";
    case MetricId::bertscore: return "BERTScore";
    case MetricId::sbert: return "S-BERT";
    case MetricId::sts: return "STSScore";
    case MetricId::ensemble: return "Ensemble";
  }
  return "";
}

SummaryTable summary_table(std::span<const BenchmarkRun> runs) {
  check_runs(runs);
  SummaryTable t;
  for (const auto& r : runs) t.groups.push_back({display_name(r.dataset.name), r.label_kind()});
  t.values = nlohmann::ordered_json::object();
  for (auto metric : kAllMetrics) {
    const bool used = std::any_of(runs.begin(), runs.end(), [&](const BenchmarkRun& r) {
      return std::find(r.metrics.begin(), r.metrics.end(), metric) != r.metrics.end();
    });
    if (!used) continue;
    t.row_labels.push_back(display_name(metric));
    std::vector<std::string> row;
    auto values = nlohmann::ordered_json::array();
    for (const auto& r : runs) {
      auto [cells, v] = cells_for(find_summary(r.summaries, metric), r.label_kind());
      row.insert(row.end(), cells.begin(), cells.end());
      values.push_back(std::move(v));
    }
    t.cells.push_back(std::move(row));
    t.values[display_name(metric)] = std::move(values);
  }
  return t;
}

SummaryTable length_split_table(std::span<const BenchmarkRun> runs, MetricId metric) {
  check_runs(runs);
  SummaryTable t;
  for (const auto& r : runs) {
    if (!r.length_split) fail(Errc::incompatible_runs, "run " + r.run_id + " was made without a length split");
    t.groups.push_back({display_name(r.dataset.name), r.label_kind()});
  }
  t.values = nlohmann::ordered_json::object();
  t.values["metric"] = display_name(metric);
  const char* labels[] = {"All", "Shorter", "Longer"};
  for (int which = 0; which < 3; ++which) {
    t.row_labels.emplace_back(labels[which]);
    std::vector<std::string> row;
    auto values = nlohmann::ordered_json::array();
    for (const auto& r : runs) {
      const auto& source = which == 0 ? r.summaries : which == 1 ? r.length_split->shorter : r.length_split->longer;
      auto [cells, v] = cells_for(find_summary(source, metric), r.label_kind());
      row.insert(row.end(), cells.begin(), cells.end());
      if (which == 0) v["median_length"] = r.length_split->median;
      values.push_back(std::move(v));
    }
    t.cells.push_back(std::move(row));
    t.values[labels[which]] = std::move(values);
  }
  return t;
}

std::string render_markdown(const SummaryTable& table) {
  std::string out = "|";
  std::string second = "|";
  std::string rule = "|---|";
  out += " |";
  second += " |";
  for (const auto& g : table.groups) {
    const auto cols = column_names(g.kind, false);
    out += " " + g.dataset + " | |";
    second += " " + cols[0] + " | " + cols[1] + " |";
    rule += "---:|---:|";
  }
  out += "\n" + rule + "\n" + second + "\n";
  for (std::size_t r = 0; r < table.row_labels.size(); ++r) {
    out += "| " + table.row_labels[r] + " |";
    for (const auto& c : table.cells[r]) out += " " + c + " |";
    out += "\n";
  }
  return out;
}

std::string render_csv(const SummaryTable& table) {
  std::string out = "row";
  for (const auto& g : table.groups) {
    const auto cols = column_names(g.kind, true);
    out += "," + csv_escape(g.dataset + " " + cols[0]) + "," + csv_escape(g.dataset + " " + cols[1]);
  }
  out += "\n";
  for (std::size_t r = 0; r < table.row_labels.size(); ++r) {
    out += csv_escape(table.row_labels[r]);
    for (const auto& c : table.cells[r]) out += "," + csv_escape(c);
    out += "\n";
  }
  return out;
}

std::string render_json(const SummaryTable& table) {
  nlohmann::ordered_json j;
  auto columns = nlohmann::ordered_json::array();
  for (const auto& g : table.groups) {
    const auto cols = column_names(g.kind, true);
    columns.push_back(nlohmann::ordered_json{{"dataset", g.dataset}, {"label_kind", to_string(g.kind)}, {"columns", {cols[0], cols[1]}}});
  }
  j["groups"] = std::move(columns);
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < table.row_labels.size(); ++r)
    rows.push_back(nlohmann::ordered_json{{"row", table.row_labels[r]}, {"cells", table.cells[r]}});
  j["rows"] = std::move(rows);
  j["values"] = table.values;
  return j.dump(2) + "\n";
}

}  // namespace stsscore
