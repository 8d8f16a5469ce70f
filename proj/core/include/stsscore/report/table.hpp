#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stsscore/report/run.hpp"

namespace stsscore {

// Decimal rounding of the shortest round-trip representation of `value`, with
// ties going away from zero: 0.895 → "0.90", 0.125 → "0.13", −0.005 → "-0.01".
std::string round_half_up(double value, int digits = 2);

// Rows × dataset column groups. Similarity and MQM datasets contribute the
// columns (r, ρ); binary datasets contribute (neg, pos) as "mean (std)".
struct SummaryTable {
  struct Group {
    std::string dataset;  // display name, e.g. "STS-B"
    LabelKind kind = LabelKind::similarity_0_5;
  };
  std::vector<Group> groups;
  std::vector<std::string> row_labels;
  std::vector<std::vector<std::string>> cells;  // per row: two cells per group
  nlohmann::ordered_json values;                 // unrounded numbers behind the cells
};

// One row per metric (canonical order), one column group per run.
// Throws incompatible_runs when two runs cover the same dataset and split,
// invalid_argument for an empty list.
SummaryTable summary_table(std::span<const BenchmarkRun> runs);

// Rows All / Shorter / Longer for one metric over runs made with --length-split.
SummaryTable length_split_table(std::span<const BenchmarkRun> runs, MetricId metric);

std::string render_markdown(const SummaryTable& table);
std::string render_csv(const SummaryTable& table);
std::string render_json(const SummaryTable& table);

std::string display_name(DatasetName name);
std::string display_name(MetricId metric);

}  // namespace stsscore
