#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "stsscore/types.hpp"

namespace stsscore {

enum class SourceKind { stsb, mrpc, qqp, wmt22_zh_en, canonical_jsonl };

std::string_view to_string(SourceKind kind);
// Accepts the CLI spellings: stsb, mrpc, qqp, wmt22_zh_en, canonical (or canonical_jsonl).
std::optional<SourceKind> parse_source_kind(std::string_view text);

struct DatasetSource {
  SourceKind kind = SourceKind::canonical_jsonl;
  std::filesystem::path path;
  std::string split = "test";
  // Rows whose text is empty after trimming are dropped (and counted) instead
  // of failing the load.
  bool skip_empty_texts = false;
};

struct LoadStats {
  std::string format;           // detected layout, e.g. "glue-tsv", "sts-original", "mqm-csv"
  std::size_t rows_read = 0;    // data rows seen, excluding header
  std::size_t pairs = 0;        // pairs in the resulting dataset
  std::size_t skipped_unscored = 0;  // MQM rows with score "None"/empty
  std::size_t skipped_empty = 0;     // rows dropped for empty text (skip_empty_texts)
};

void to_json(nlohmann::json& j, const LoadStats& s);

// Column maps (header names matched case-insensitively):
//   stsb  GLUE TSV: index?, sentence1, sentence2, score; or the original
//         headerless STS benchmark file: genre, file, year, id, score, s1, s2[, ...]
//   mrpc  quality, #1 id, #2 id, #1 string, #2 string
//   qqp   id, question1, question2, is_duplicate
//   wmt22 system|sys, seg_id|segid|seg, ref|reference, hyp|mt|translation|target, score|mqm
//         (tab- or comma-separated; comma files may quote fields)
// Errors: missing_file, parse_error (with line number), wrong_split, empty_text.
LabeledDataset load_dataset(const DatasetSource& source, LoadStats* stats = nullptr);

// Canonical records {"id","text_a","text_b","label_kind","label","split"}, in that field order.
std::vector<nlohmann::ordered_json> to_canonical(const LabeledDataset& dataset);
// Throws schema_violation naming the offending field.
LabeledDataset from_canonical(const std::vector<nlohmann::json>& records, DatasetName name = DatasetName::custom);

// One record per line, newline-terminated.
std::string to_canonical_jsonl(const LabeledDataset& dataset);
void write_canonical_jsonl(const std::filesystem::path& path, const LabeledDataset& dataset);

// Deterministic sample of n pairs in original order. With stratify, class
// counts follow the largest-remainder apportionment of n (binary labels only).
// Errors: out_of_range for n outside [1, size]; invalid_argument for stratify
// on a non-binary dataset.
LabeledDataset subset(const LabeledDataset& dataset, std::size_t n, std::uint64_t seed, bool stratify);

}  // namespace stsscore
