#include <gtest/gtest.h>

#include <random>
#include <string>
#include <vector>

#include "stsscore/backend/tokenizer.hpp"
#include "test_support.hpp"

using namespace stsscore;
namespace st = stsscore::testing;

namespace {

struct Case {
  const char* oracle;
  const char* bundle;
};

std::vector<int> as_ints(const std::vector<std::int32_t>& v) { return {v.begin(), v.end()}; }
std::vector<int> as_ints(const std::vector<std::uint8_t>& v) { return {v.begin(), v.end()}; }

class TokenizerOracle : public ::testing::TestWithParam<Case> {
 protected:
  void SetUp() override {
    oracle_ = st::read_json(st::oracle_file(GetParam().oracle));
    tokenizer_ = Tokenizer::from_file(st::bundle_dir(GetParam().bundle) / "tokenizer.json");
  }
  nlohmann::json oracle_;
  std::optional<Tokenizer> tokenizer_;
};

}  // namespace

TEST_P(TokenizerOracle, SingleTextsMatch) {
  const std::size_t max_len = oracle_["max_len"];
  for (const auto& c : oracle_["singles"]) {
    const std::string text = c["text"];
    const auto e = tokenizer_->encode(text, max_len);
    EXPECT_EQ(as_ints(e.token_ids), c["ids"].get<std::vector<int>>()) << text;
    EXPECT_EQ(as_ints(e.special_tokens_mask), c["special"].get<std::vector<int>>()) << text;
    EXPECT_EQ(as_ints(e.type_ids), c["type_ids"].get<std::vector<int>>()) << text;
    EXPECT_EQ(e.attention_mask, std::vector<std::uint8_t>(e.size(), 1));
  }
}

TEST_P(TokenizerOracle, PairsMatchWithLongestFirstTruncation) {
  const std::size_t max_len = oracle_["max_len"];
  for (const auto& c : oracle_["pairs"]) {
    const std::string a = c["text_a"], b = c["text_b"];
    const auto e = tokenizer_->encode_pair(a, b, max_len);
    EXPECT_EQ(as_ints(e.token_ids), c["ids"].get<std::vector<int>>()) << a << " | " << b;
    EXPECT_EQ(as_ints(e.special_tokens_mask), c["special"].get<std::vector<int>>()) << a << " | " << b;
    EXPECT_EQ(as_ints(e.type_ids), c["type_ids"].get<std::vector<int>>()) << a << " | " << b;
    ASSERT_TRUE(e.pair_boundary);
  }
}

TEST_P(TokenizerOracle, RawIdsAndDecodeMatch) {
  for (const auto& c : oracle_["decoded"]) {
    const auto ids = c["ids"].get<std::vector<std::int32_t>>();
    EXPECT_EQ(tokenizer_->decode(ids), c["text"].get<std::string>());
  }
  for (std::size_t i = 0; i < oracle_["decoded"].size(); ++i) {
    const std::string text = oracle_["singles"][i]["text"];
    EXPECT_EQ(tokenizer_->encode_ids(text), oracle_["decoded"][i]["ids"].get<std::vector<std::int32_t>>()) << text;
  }
}

TEST_P(TokenizerOracle, TruncationNeverExceedsMaxLen) {
  std::mt19937_64 rng(11);
  const auto& words = st::fixture_words();
  std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
  const std::size_t budget = tokenizer_->added_special_tokens(true) + 1;
  for (int i = 0; i < 200; ++i) {
    std::string a, b;
    for (int w = 0; w < 40 + i % 50; ++w) a += words[pick(rng)] + " ";
    for (int w = 0; w < 1 + i % 90; ++w) b += words[pick(rng)] + " ";
    for (std::size_t max_len : {budget + 1, std::size_t{8}, std::size_t{24}, std::size_t{64}}) {
      EXPECT_LE(tokenizer_->encode_pair(a, b, max_len).size(), max_len);
      EXPECT_LE(tokenizer_->encode(a, max_len).size(), max_len);
    }
  }
}

TEST_P(TokenizerOracle, DeterministicAcrossCopies) {
  const Tokenizer copy = *tokenizer_;
  EXPECT_EQ(copy.encode_pair("A man plays.", "Ein Mann spielt.", 32),
            tokenizer_->encode_pair("A man plays.", "Ein Mann spielt.", 32));
}

INSTANTIATE_TEST_SUITE_P(Tokenizers, TokenizerOracle,
                         ::testing::Values(Case{"tokenizer_wordpiece.json", "tiny-bert-sts"},
                                           Case{"tokenizer_bytelevel_bpe.json", "tiny-roberta-sts"}),
                         [](const auto& info) { return std::string(info.param.bundle).substr(5, 4) == "bert" ? "WordPiece" : "ByteLevelBpe"; });

TEST(Tokenizer, SpecialTokenQueries) {
  const auto tok = Tokenizer::from_file(st::bundle_dir("tiny-bert-sts") / "tokenizer.json");
  const auto cls = tok.token_to_id("[CLS]");
  ASSERT_TRUE(cls);
  EXPECT_TRUE(tok.is_special(*cls));
  EXPECT_EQ(tok.id_to_token(*cls), "[CLS]");
  EXPECT_EQ(tok.added_special_tokens(false), 2u);
  EXPECT_EQ(tok.added_special_tokens(true), 3u);
  EXPECT_GT(tok.vocab_size(), 100u);
}

TEST(Tokenizer, MalformedSpecIsRejected) {
  EXPECT_ERRC(Tokenizer::from_json(nlohmann::json{{"model", {{"type", "Unigram"}}}}), Errc::malformed_config);
  EXPECT_ERRC(Tokenizer::from_file(st::fixtures_dir() / "missing.json"), Errc::missing_file);
}
