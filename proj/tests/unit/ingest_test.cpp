#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "stsscore/ingest.hpp"
#include "stsscore/validate.hpp"
#include "test_support.hpp"

using namespace stsscore;
namespace st = stsscore::testing;

namespace {

void write(const std::filesystem::path& p, const std::string& content) { std::ofstream(p, std::ios::binary) << content; }

}  // namespace

TEST(Ingest, StsbGlueTsv) {
  LoadStats stats;
  const auto d = load_dataset({SourceKind::stsb, st::data_file("stsb_glue_small.tsv")}, &stats);
  EXPECT_EQ(d.name, DatasetName::stsb);
  EXPECT_EQ(d.split, "test");
  ASSERT_EQ(d.size(), 6u);
  EXPECT_EQ(d.pairs[1].pair, (SentencePair{"1", "A woman is slicing an onion.", "A woman is cutting an onion."}));
  EXPECT_EQ(d.pairs[1].label, (Label{LabelKind::similarity_0_5, 4.2}));
  EXPECT_EQ(stats.format, "glue-tsv");
  EXPECT_EQ(stats.rows_read, 6u);
  EXPECT_EQ(stats.pairs, 6u);
}

TEST(Ingest, StsbOriginalHeaderlessFile) {
  LoadStats stats;
  const auto d = load_dataset({SourceKind::stsb, st::data_file("sts_original_small.csv")}, &stats);
  EXPECT_EQ(stats.format, "sts-original");
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d.pairs[0].pair, (SentencePair{"0", "A girl is styling her hair.", "A girl is brushing her hair."}));
  EXPECT_EQ(d.pairs[2].label.value, 5.0);
}

TEST(Ingest, StsbLabelOutOfRangeIsParseErrorWithLine) {
  try {
    load_dataset({SourceKind::stsb, st::data_file("stsb_bad_label.tsv")});
    FAIL() << "expected parse error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::parse_error);
    EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos) << e.what();
  }
}

TEST(Ingest, StsbWithoutScoresIsWrongSplit) {
  st::TempDir tmp;
  write(tmp / "test.tsv", "index\tsentence1\tsentence2\n0\ta b\tc d\n");
  EXPECT_ERRC(load_dataset({SourceKind::stsb, tmp / "test.tsv"}), Errc::wrong_split);
}

TEST(Ingest, Mrpc) {
  const auto d = load_dataset({SourceKind::mrpc, st::data_file("mrpc_small.tsv")});
  ASSERT_EQ(d.size(), 4u);
  EXPECT_EQ(d.pairs[0].pair.id, "1089874_1089925");
  EXPECT_EQ(d.pairs[0].label, (Label{LabelKind::binary, 1.0}));
  EXPECT_EQ(d.pairs[1].label, (Label{LabelKind::binary, 0.0}));
  EXPECT_EQ(d.pairs[3].pair.text_b, "The vote was delayed until next week.");
}

TEST(Ingest, QqpTrainAndUnlabeledTest) {
  const auto d = load_dataset({SourceKind::qqp, st::data_file("qqp_train_small.tsv"), "train"});
  EXPECT_EQ(d.split, "train");
  ASSERT_EQ(d.size(), 5u);
  EXPECT_EQ(d.pairs[1].label.value, 1.0);
  EXPECT_EQ(d.pairs[2].pair.text_a, "Why is the sky blue?");
  EXPECT_ERRC(load_dataset({SourceKind::qqp, st::data_file("qqp_test_small.tsv")}), Errc::wrong_split);
}

TEST(Ingest, QqpEmptyQuestionFailsOrIsSkipped) {
  st::TempDir tmp;
  write(tmp / "train.tsv",
        "id\tqid1\tqid2\tquestion1\tquestion2\tis_duplicate\n0\t1\t2\tWhy?\t \t0\n1\t3\t4\tHow?\tWhat?\t1\n");
  EXPECT_ERRC(load_dataset({SourceKind::qqp, tmp / "train.tsv", "train"}), Errc::empty_text);
  LoadStats stats;
  const auto d = load_dataset({SourceKind::qqp, tmp / "train.tsv", "train", true}, &stats);
  EXPECT_EQ(d.size(), 1u);
  EXPECT_EQ(stats.skipped_empty, 1u);
  EXPECT_EQ(stats.rows_read, 2u);
}

TEST(Ingest, WmtMqmTsvSkipsUnscoredRows) {
  LoadStats stats;
  const auto d = load_dataset({SourceKind::wmt22_zh_en, st::data_file("wmt22_mqm_small.tsv")}, &stats);
  ASSERT_EQ(d.size(), 4u);
  EXPECT_EQ(stats.skipped_unscored, 1u);
  EXPECT_EQ(stats.format, "mqm-tsv");
  EXPECT_EQ(d.pairs[1].pair, (SentencePair{"sysB:0", "The weather is nice today.", "Today weather nice."}));
  EXPECT_EQ(d.pairs[3].label, (Label{LabelKind::mqm, -7.25}));
}

TEST(Ingest, WmtMqmQuotedCsv) {
  LoadStats stats;
  const auto d = load_dataset({SourceKind::wmt22_zh_en, st::data_file("wmt22_mqm_small.csv")}, &stats);
  EXPECT_EQ(stats.format, "mqm-csv");
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d.pairs[0].pair.text_b, "The weather is good, today.");
  EXPECT_EQ(d.pairs[1].pair.text_b, "He said \"nice\" weather.");
  EXPECT_EQ(d.pairs[2].label.value, 0.0);
}

TEST(Ingest, MissingFileAndMissingColumns) {
  EXPECT_ERRC(load_dataset({SourceKind::mrpc, st::data_file("nope.tsv")}), Errc::missing_file);
  st::TempDir tmp;
  write(tmp / "m.tsv", "Quality\t#1 String\n1\ta\n");
  EXPECT_THROW(load_dataset({SourceKind::mrpc, tmp / "m.tsv"}), Error);
  write(tmp / "bad.tsv", "Quality\t#1 ID\t#2 ID\t#1 String\t#2 String\nyes\t1\t2\ta\tb\n");
  EXPECT_ERRC(load_dataset({SourceKind::mrpc, tmp / "bad.tsv"}), Errc::parse_error);
}

TEST(Ingest, CanonicalRoundTripIsByteIdentical) {
  const std::pair<SourceKind, std::string> files[] = {{SourceKind::stsb, "stsb_glue_small.tsv"},
                                                      {SourceKind::mrpc, "mrpc_small.tsv"},
                                                      {SourceKind::wmt22_zh_en, "wmt22_mqm_small.tsv"},
                                                      {SourceKind::canonical_jsonl, "separable_binary.jsonl"}};
  st::TempDir tmp;
  for (const auto& [kind, file] : files) {
    const auto once = to_canonical_jsonl(load_dataset({kind, st::data_file(file)}));
    const auto twice = to_canonical_jsonl(load_dataset({kind, st::data_file(file)}));
    EXPECT_EQ(once, twice) << file;
    const auto d = load_dataset({kind, st::data_file(file)});
    write_canonical_jsonl(tmp / "c.jsonl", d);
    const auto back = load_dataset({SourceKind::canonical_jsonl, tmp / "c.jsonl", d.split});
    EXPECT_EQ(back.pairs, d.pairs) << file;
    EXPECT_EQ(to_canonical_jsonl(back), once) << file;
  }
}

TEST(Ingest, CanonicalFieldOrder) {
  const auto d = load_dataset({SourceKind::mrpc, st::data_file("mrpc_small.tsv")});
  const auto records = to_canonical(d);
  std::vector<std::string> keys;
  for (const auto& [k, v] : records.front().items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"id", "text_a", "text_b", "label_kind", "label", "split"}));
}

TEST(Ingest, CanonicalSchemaViolationsNameTheField) {
  auto bad = [](nlohmann::json j, const std::string& field) {
    try {
      from_canonical({j});
      ADD_FAILURE() << "accepted " << j.dump();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::schema_violation);
      EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
    }
  };
  const nlohmann::json ok = {{"id", "a"}, {"text_a", "x"}, {"text_b", "y"}, {"label_kind", "binary"}, {"label", 1}, {"split", "t"}};
  EXPECT_NO_THROW(from_canonical({ok}));
  auto j = ok;
  j.erase("text_b");
  bad(j, "text_b");
  j = ok;
  j["label"] = "one";
  bad(j, "label");
  j = ok;
  j["label_kind"] = "ordinal";
  bad(j, "label_kind");
  j = ok;
  j["label"] = 0.5;
  bad(j, "label");
  auto j2 = ok;
  j2["id"] = "b";
  j2["split"] = "other";
  EXPECT_ERRC(from_canonical({ok, j2}), Errc::schema_violation);
}

TEST(Ingest, LabelKindMappingIsExhaustive) {
  EXPECT_EQ(load_dataset({SourceKind::stsb, st::data_file("stsb_glue_small.tsv")}).label_kind(), LabelKind::similarity_0_5);
  EXPECT_EQ(load_dataset({SourceKind::mrpc, st::data_file("mrpc_small.tsv")}).label_kind(), LabelKind::binary);
  EXPECT_EQ(load_dataset({SourceKind::qqp, st::data_file("qqp_train_small.tsv"), "train"}).label_kind(), LabelKind::binary);
  EXPECT_EQ(load_dataset({SourceKind::wmt22_zh_en, st::data_file("wmt22_mqm_small.tsv")}).label_kind(), LabelKind::mqm);
}

TEST(Subset, DeterministicOrderedAndSized) {
  const auto d = st::binary_dataset(100, 1);
  const auto a = subset(d, 30, 7, false);
  EXPECT_EQ(a, subset(d, 30, 7, false));
  EXPECT_NE(a.pairs, subset(d, 30, 8, false).pairs);
  ASSERT_EQ(a.size(), 30u);
  std::set<std::string> ids;
  std::size_t last = 0;
  for (const auto& p : a.pairs) {
    ids.insert(p.pair.id);
    const std::size_t idx = std::stoul(p.pair.id.substr(1));
    EXPECT_GE(idx, last);
    last = idx;
  }
  EXPECT_EQ(ids.size(), 30u);
  EXPECT_EQ(subset(d, 100, 3, false).pairs, d.pairs);
}

TEST(Subset, StratifiedFollowsLargestRemainder) {
  const auto d = st::binary_dataset(100, 2);  // 34 negatives, 66 positives
  for (std::size_t n : {1u, 10u, 33u, 50u, 99u}) {
    const auto s = subset(d, n, 5, true);
    std::size_t pos = 0;
    for (const auto& p : s.pairs) pos += p.label.value == 1.0;
    const double exact = static_cast<double>(n) * 66.0 / 100.0;
    EXPECT_LE(std::abs(static_cast<double>(pos) - exact), 1.0) << n;
    EXPECT_EQ(s.size(), n);
  }
}

TEST(Subset, Errors) {
  const auto d = st::binary_dataset(10, 3);
  EXPECT_ERRC(subset(d, 0, 1, false), Errc::out_of_range);
  EXPECT_ERRC(subset(d, 11, 1, false), Errc::out_of_range);
  EXPECT_ERRC(subset(st::similarity_dataset(10, 1), 5, 1, true), Errc::invalid_argument);
}

TEST(Ingest, LoadedDatasetsValidate) {
  for (const auto& d : {load_dataset({SourceKind::stsb, st::data_file("stsb_glue_small.tsv")}),
                        load_dataset({SourceKind::wmt22_zh_en, st::data_file("wmt22_mqm_small.csv")})})
    EXPECT_TRUE(validate_dataset(d).empty());
}
