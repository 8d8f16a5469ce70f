#include "stsscore/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "stsscore/error.hpp"
#include "stsscore/text.hpp"

namespace stsscore {

namespace {

struct Row {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::missing_file, "cannot read dataset file " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (content.rfind("\xEF\xBB\xBF", 0) == 0) content.erase(0, 3);
  return content;
}

[[noreturn]] void parse_fail(const std::filesystem::path& path, std::size_t line, const std::string& what) {
  fail(Errc::parse_error, path.filename().string() + ":" + std::to_string(line) + ": " + what);
}

// Tab-separated rows, one per line, without quoting. Blank lines are skipped.
std::vector<Row> read_tsv(const std::string& content) {
  std::vector<Row> rows;
  std::size_t line = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string::npos) end = content.size();
    std::string_view l(content.data() + pos, end - pos);
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    ++line;
    pos = end + 1;
    if (text::is_blank(l)) continue;
    Row row{line, {}};
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = l.find('\t', start);
      row.fields.emplace_back(l.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// RFC 4180 comma-separated rows; quoted fields may contain commas, doubled
// quotes and newlines.
std::vector<Row> read_csv(const std::string& content, const std::filesystem::path& path) {
  std::vector<Row> rows;
  std::size_t line = 1;
  std::size_t i = 0;
  const std::size_t n = content.size();
  while (i < n) {
    Row row{line, {}};
    std::string field;
    bool row_done = false;
    bool any = false;
    while (!row_done) {
      field.clear();
      if (i < n && content[i] == '"') {
        const std::size_t open_line = line;
        ++i;
        while (true) {
          if (i >= n) parse_fail(path, open_line, "unterminated quoted field");
          if (content[i] == '"') {
            if (i + 1 < n && content[i + 1] == '"') {
              field.push_back('"');
              i += 2;
              continue;
            }
            ++i;
            break;
          }
          if (content[i] == '\n') ++line;
          field.push_back(content[i++]);
        }
        while (i < n && content[i] != ',' && content[i] != '\n' && content[i] != '\r') {
          if (!text::is_white_space(static_cast<unsigned char>(content[i])))
            parse_fail(path, line, "unexpected character after closing quote");
          ++i;
        }
      } else {
        while (i < n && content[i] != ',' && content[i] != '\n' && content[i] != '\r') field.push_back(content[i++]);
      }
      row.fields.push_back(field);
      any = any || !field.empty();
      if (i < n && content[i] == ',') {
        ++i;
        any = true;
      } else {
        if (i < n && content[i] == '\r') ++i;
        if (i < n && content[i] == '\n') ++i;
        ++line;
        row_done = true;
      }
    }
    if (any) rows.push_back(std::move(row));
  }
  return rows;
}

std::string lower_ascii(std::string_view s) {
  std::string out(text::trim(s));
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Case-insensitive header lookup; returns the index of the first matching alias.
std::optional<std::size_t> find_column(const std::vector<std::string>& header, std::initializer_list<const char*> aliases) {
  for (const char* alias : aliases)
    for (std::size_t i = 0; i < header.size(); ++i)
      if (lower_ascii(header[i]) == alias) return i;
  return std::nullopt;
}

double parse_number(std::string_view field, const std::filesystem::path& path, std::size_t line, const char* what) {
  const std::string_view t = text::trim(field);
  double v = 0.0;
  const auto* first = t.data();
  const auto* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (t.empty() || ec != std::errc() || ptr != last || !std::isfinite(v))
    parse_fail(path, line, std::string("invalid ") + what + " '" + std::string(t) + "'");
  return v;
}

struct Builder {
  const DatasetSource& source;
  LoadStats& stats;
  LabeledDataset dataset;

  void add(std::size_t line, std::string id, std::string a, std::string b, Label label) {
    if (text::is_blank(a) || text::is_blank(b)) {
      if (source.skip_empty_texts) {
        ++stats.skipped_empty;
        return;
      }
      fail(Errc::empty_text, source.path.filename().string() + ":" + std::to_string(line) + ": empty text in pair '" + id + "'");
    }
    dataset.pairs.push_back({{std::move(id), std::move(a), std::move(b)}, label});
  }
};

const Row& field_count_check(const Row& row, std::size_t needed, const std::filesystem::path& path) {
  if (row.fields.size() < needed)
    parse_fail(path, row.line, "expected at least " + std::to_string(needed) + " fields, found " + std::to_string(row.fields.size()));
  return row;
}

void load_stsb(Builder& b, const std::string& content) {
  const auto& path = b.source.path;
  const auto rows = read_tsv(content);
  if (rows.empty()) return;
  const auto& header = rows.front().fields;
  const auto s1 = find_column(header, {"sentence1"});
  const auto s2 = find_column(header, {"sentence2"});
  if (s1 && s2) {
    b.stats.format = "glue-tsv";
    const auto score = find_column(header, {"score", "label"});
    if (!score)
      fail(Errc::wrong_split, path.filename().string() +
                                  ": STS-B file has no score column (GLUE withholds test labels; use the original STS benchmark test file)");
    const auto index = find_column(header, {"index", "id"});
    const std::size_t needed = std::max({*s1, *s2, *score, index.value_or(0)}) + 1;
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const auto& row = field_count_check(rows[r], needed, path);
      ++b.stats.rows_read;
      const double v = parse_number(row.fields[*score], path, row.line, "score");
      if (v < 0.0 || v > 5.0) parse_fail(path, row.line, "score " + std::string(text::trim(row.fields[*score])) + " outside [0,5]");
      std::string id = index ? std::string(text::trim(row.fields[*index])) : std::to_string(r - 1);
      b.add(row.line, std::move(id), row.fields[*s1], row.fields[*s2], {LabelKind::similarity_0_5, v});
    }
    return;
  }
  // Original STS benchmark layout: genre, file, year, id, score, sentence1, sentence2[, sources...]
  b.stats.format = "sts-original";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = field_count_check(rows[r], 7, path);
    ++b.stats.rows_read;
    const double v = parse_number(row.fields[4], path, row.line, "score");
    if (v < 0.0 || v > 5.0) parse_fail(path, row.line, "score " + std::string(text::trim(row.fields[4])) + " outside [0,5]");
    b.add(row.line, std::to_string(r), row.fields[5], row.fields[6], {LabelKind::similarity_0_5, v});
  }
}

Label parse_binary(std::string_view field, const std::filesystem::path& path, std::size_t line) {
  const auto t = text::trim(field);
  if (t == "0") return {LabelKind::binary, 0.0};
  if (t == "1") return {LabelKind::binary, 1.0};
  parse_fail(path, line, "binary label must be 0 or 1, found '" + std::string(t) + "'");
}

void load_mrpc(Builder& b, const std::string& content) {
  const auto& path = b.source.path;
  const auto rows = read_tsv(content);
  if (rows.empty()) return;
  b.stats.format = "mrpc-tsv";
  const auto& header = rows.front().fields;
  const auto quality = find_column(header, {"quality", "label"});
  const auto id1 = find_column(header, {"#1 id"});
  const auto id2 = find_column(header, {"#2 id"});
  const auto s1 = find_column(header, {"#1 string", "sentence1"});
  const auto s2 = find_column(header, {"#2 string", "sentence2"});
  if (!s1 || !s2) parse_fail(path, rows.front().line, "header lacks '#1 String'/'#2 String' columns");
  if (!quality) fail(Errc::wrong_split, path.filename().string() + ": MRPC file has no Quality column (unlabeled split)");
  const std::size_t needed = std::max({*quality, *s1, *s2, id1.value_or(0), id2.value_or(0)}) + 1;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = field_count_check(rows[r], needed, path);
    ++b.stats.rows_read;
    const Label label = parse_binary(row.fields[*quality], path, row.line);
    std::string id = id1 && id2 ? std::string(text::trim(row.fields[*id1])) + "_" + std::string(text::trim(row.fields[*id2]))
                                : std::to_string(r - 1);
    b.add(row.line, std::move(id), row.fields[*s1], row.fields[*s2], label);
  }
}

void load_qqp(Builder& b, const std::string& content) {
  const auto& path = b.source.path;
  if (lower_ascii(b.source.split) == "test")
    fail(Errc::wrong_split, "QQP test labels are not distributed; use the training split");
  const auto rows = read_tsv(content);
  if (rows.empty()) return;
  b.stats.format = "qqp-tsv";
  const auto& header = rows.front().fields;
  const auto id = find_column(header, {"id"});
  const auto q1 = find_column(header, {"question1"});
  const auto q2 = find_column(header, {"question2"});
  const auto dup = find_column(header, {"is_duplicate", "label"});
  if (!q1 || !q2) parse_fail(path, rows.front().line, "header lacks question1/question2 columns");
  if (!dup) fail(Errc::wrong_split, path.filename().string() + ": QQP file has no is_duplicate column (test split labels are not shared)");
  const std::size_t needed = std::max({*q1, *q2, *dup, id.value_or(0)}) + 1;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = field_count_check(rows[r], needed, path);
    ++b.stats.rows_read;
    const Label label = parse_binary(row.fields[*dup], path, row.line);
    std::string pid = id ? std::string(text::trim(row.fields[*id])) : std::to_string(r - 1);
    b.add(row.line, std::move(pid), row.fields[*q1], row.fields[*q2], label);
  }
}

void load_wmt(Builder& b, const std::string& content) {
  const auto& path = b.source.path;
  const std::size_t first_nl = content.find('\n');
  const std::string_view first_line(content.data(), first_nl == std::string::npos ? content.size() : first_nl);
  const bool tsv = first_line.find('\t') != std::string_view::npos;
  b.stats.format = tsv ? "mqm-tsv" : "mqm-csv";
  const auto rows = tsv ? read_tsv(content) : read_csv(content, path);
  if (rows.empty()) return;
  const auto& header = rows.front().fields;
  const auto sys = find_column(header, {"system", "sys"});
  const auto seg = find_column(header, {"seg_id", "segid", "seg", "segment_id"});
  const auto ref = find_column(header, {"ref", "reference"});
  const auto hyp = find_column(header, {"hyp", "mt", "translation", "target"});
  const auto score = find_column(header, {"score", "mqm"});
  if (!sys || !seg || !ref || !hyp || !score)
    parse_fail(path, rows.front().line, "header must name system, seg_id, ref, hyp and score columns");
  const std::size_t needed = std::max({*sys, *seg, *ref, *hyp, *score}) + 1;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = field_count_check(rows[r], needed, path);
    ++b.stats.rows_read;
    const auto raw = lower_ascii(row.fields[*score]);
    if (raw.empty() || raw == "none" || raw == "nan" || raw == "na") {
      ++b.stats.skipped_unscored;
      continue;
    }
    const double v = parse_number(row.fields[*score], path, row.line, "MQM score");
    std::string id = std::string(text::trim(row.fields[*sys])) + ":" + std::string(text::trim(row.fields[*seg]));
    b.add(row.line, std::move(id), row.fields[*ref], row.fields[*hyp], {LabelKind::mqm, v});
  }
}

void load_canonical(Builder& b, const std::string& content) {
  b.stats.format = "canonical-jsonl";
  std::vector<nlohmann::json> records;
  std::istringstream in(content);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::is_blank(line)) continue;
    ++b.stats.rows_read;
    try {
      records.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      parse_fail(b.source.path, line_no, std::string("invalid JSON: ") + e.what());
    }
  }
  LabeledDataset d = from_canonical(records, DatasetName::custom);
  for (auto& lp : d.pairs) b.add(0, lp.pair.id, lp.pair.text_a, lp.pair.text_b, lp.label);
  if (!records.empty()) b.dataset.split = d.split;
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  // Rejection sampling keeps the result identical on every standard library.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

std::vector<std::size_t> sample_indices(std::vector<std::size_t> pool, std::size_t k, std::mt19937_64& rng) {
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(uniform_below(rng, pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace

std::string_view to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::stsb: return "stsb";
    case SourceKind::mrpc: return "mrpc";
    case SourceKind::qqp: return "qqp";
    case SourceKind::wmt22_zh_en: return "wmt22_zh_en";
    case SourceKind::canonical_jsonl: return "canonical";
  }
  return "canonical";
}

std::optional<SourceKind> parse_source_kind(std::string_view text) {
  if (text == "stsb") return SourceKind::stsb;
  if (text == "mrpc") return SourceKind::mrpc;
  if (text == "qqp") return SourceKind::qqp;
  if (text == "wmt22_zh_en") return SourceKind::wmt22_zh_en;
  if (text == "canonical" || text == "canonical_jsonl") return SourceKind::canonical_jsonl;
  return std::nullopt;
}

void to_json(nlohmann::json& j, const LoadStats& s) {
  j = nlohmann::json{{"format", s.format},
                     {"rows_read", s.rows_read},
                     {"pairs", s.pairs},
                     {"skipped_unscored", s.skipped_unscored},
                     {"skipped_empty", s.skipped_empty}};
}

LabeledDataset load_dataset(const DatasetSource& source, LoadStats* stats_out) {
  const std::string content = read_file(source.path);
  LoadStats stats;
  Builder b{source, stats, {}};
  b.dataset.split = source.split;
  switch (source.kind) {
    case SourceKind::stsb:
      b.dataset.name = DatasetName::stsb;
      load_stsb(b, content);
      break;
    case SourceKind::mrpc:
      b.dataset.name = DatasetName::mrpc;
      load_mrpc(b, content);
      break;
    case SourceKind::qqp:
      b.dataset.name = DatasetName::qqp;
      load_qqp(b, content);
      break;
    case SourceKind::wmt22_zh_en:
      b.dataset.name = DatasetName::wmt22_zh_en;
      load_wmt(b, content);
      break;
    case SourceKind::canonical_jsonl:
      b.dataset.name = DatasetName::custom;
      load_canonical(b, content);
      break;
  }
  stats.pairs = b.dataset.pairs.size();
  if (stats_out) *stats_out = stats;
  return std::move(b.dataset);
}

std::vector<nlohmann::ordered_json> to_canonical(const LabeledDataset& dataset) {
  std::vector<nlohmann::ordered_json> out;
  out.reserve(dataset.pairs.size());
  for (const auto& lp : dataset.pairs) {
    nlohmann::ordered_json r;
    r["id"] = lp.pair.id;
    r["text_a"] = lp.pair.text_a;
    r["text_b"] = lp.pair.text_b;
    r["label_kind"] = to_string(lp.label.kind);
    r["label"] = lp.label.value;
    r["split"] = dataset.split;
    out.push_back(std::move(r));
  }
  return out;
}

LabeledDataset from_canonical(const std::vector<nlohmann::json>& records, DatasetName name) {
  LabeledDataset d;
  d.name = name;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const std::string where = "record " + std::to_string(i + 1);
    if (!r.is_object()) fail(Errc::schema_violation, where + ": not a JSON object");
    auto string_field = [&](const char* key) {
      if (!r.contains(key)) fail(Errc::schema_violation, where + ": missing field '" + key + "'");
      if (!r.at(key).is_string()) fail(Errc::schema_violation, where + ": field '" + key + "' must be a string");
      return r.at(key).get<std::string>();
    };
    LabeledPair lp;
    lp.pair.id = string_field("id");
    lp.pair.text_a = string_field("text_a");
    lp.pair.text_b = string_field("text_b");
    const auto kind = parse_label_kind(string_field("label_kind"));
    if (!kind) fail(Errc::schema_violation, where + ": field 'label_kind' has an unknown value");
    if (!r.contains("label")) fail(Errc::schema_violation, where + ": missing field 'label'");
    if (!r.at("label").is_number()) fail(Errc::schema_violation, where + ": field 'label' must be a number");
    const double v = r.at("label").get<double>();
    const bool ok = std::isfinite(v) && (*kind == LabelKind::mqm ||
                                         (*kind == LabelKind::binary && (v == 0.0 || v == 1.0)) ||
                                         (*kind == LabelKind::similarity_0_5 && v >= 0.0 && v <= 5.0));
    if (!ok) fail(Errc::schema_violation, where + ": field 'label' out of range for its kind");
    lp.label = {*kind, v};
    const auto split = string_field("split");
    if (i == 0) d.split = split;
    else if (split != d.split) fail(Errc::schema_violation, where + ": field 'split' differs from the first record");
    d.pairs.push_back(std::move(lp));
  }
  return d;
}

std::string to_canonical_jsonl(const LabeledDataset& dataset) {
  std::string out;
  for (const auto& r : to_canonical(dataset)) {
    out += r.dump();
    out.push_back('\n');
  }
  return out;
}

void write_canonical_jsonl(const std::filesystem::path& path, const LabeledDataset& dataset) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io_error, "cannot write " + path.string());
  out << to_canonical_jsonl(dataset);
  if (!out) fail(Errc::io_error, "write failed for " + path.string());
}

LabeledDataset subset(const LabeledDataset& dataset, std::size_t n, std::uint64_t seed, bool stratify) {
  if (n < 1 || n > dataset.size())
    fail(Errc::out_of_range, "subset size " + std::to_string(n) + " outside [1, " + std::to_string(dataset.size()) + "]");
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> chosen;
  if (!stratify) {
    std::vector<std::size_t> all(dataset.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    chosen = sample_indices(std::move(all), n, rng);
  } else {
    if (dataset.label_kind() != LabelKind::binary)
      fail(Errc::invalid_argument, "stratified subsets need a binary dataset");
    std::array<std::vector<std::size_t>, 2> classes;
    for (std::size_t i = 0; i < dataset.size(); ++i)
      classes[dataset.pairs[i].label.value == 1.0 ? 1 : 0].push_back(i);
    const double total = static_cast<double>(dataset.size());
    std::array<std::size_t, 2> quota{};
    std::array<double, 2> remainder{};
    for (int k = 0; k < 2; ++k) {
      const double exact = static_cast<double>(n) * static_cast<double>(classes[k].size()) / total;
      quota[k] = static_cast<std::size_t>(std::floor(exact));
      remainder[k] = exact - std::floor(exact);
    }
    while (quota[0] + quota[1] < n) {
      int k = remainder[1] > remainder[0] ? 1 : remainder[0] > remainder[1] ? 0 : (classes[1].size() > classes[0].size() ? 1 : 0);
      if (quota[k] >= classes[k].size()) k = 1 - k;
      ++quota[k];
      remainder[k] = -1.0;
    }
    for (int k = 0; k < 2; ++k) {
      auto picked = sample_indices(classes[k], quota[k], rng);
      chosen.insert(chosen.end(), picked.begin(), picked.end());
    }
  }
  std::sort(chosen.begin(), chosen.end());
  LabeledDataset out;
  out.name = dataset.name;
  out.split = dataset.split;
  out.pairs.reserve(chosen.size());
  for (auto i : chosen) out.pairs.push_back(dataset.pairs[i]);
  return out;
}

}  // namespace stsscore
