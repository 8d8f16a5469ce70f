#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "stsscore/metrics/bleu.hpp"
#include "test_support.hpp"

using namespace stsscore;
namespace st = stsscore::testing;

namespace {

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ' ') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// Reference plus a perturbed copy, so that most pairs share 4-grams.
std::pair<std::string, std::string> perturbed_pair(std::mt19937_64& rng) {
  static const auto vocab = split("the a cat dog sat on mat red blue car stopped quickly , . ! it's birds sing at dawn");
  std::uniform_int_distribution<std::size_t> word(0, vocab.size() - 1);
  std::uniform_int_distribution<int> len(1, 20), edits(0, 4), op(0, 2);
  std::vector<std::string> ref;
  for (int i = len(rng); i > 0; --i) ref.push_back(vocab[word(rng)]);
  auto cand = ref;
  for (int e = edits(rng); e > 0; --e) {
    const int o = op(rng);
    if (o == 0 && cand.size() > 1) cand.erase(cand.begin() + static_cast<long>(rng() % cand.size()));
    else if (o == 1) cand.insert(cand.begin() + static_cast<long>(rng() % (cand.size() + 1)), vocab[word(rng)]);
    else cand[rng() % cand.size()] = vocab[word(rng)];
  }
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& w : v) s += (s.empty() ? "" : " ") + w;
    return s;
  };
  return {join(ref), join(cand)};
}

}  // namespace

TEST(BleuTokenize, Matches13aReference) {
  for (const auto& c : st::read_json(st::oracle_file("bleu_tokenize_13a.json"))) {
    const std::string text = c["text"];
    EXPECT_EQ(bleu_tokenize(text), c["tokens"].get<std::vector<std::string>>()) << text;
  }
}

TEST(BleuTokenize, BlankInputIsAnError) {
  EXPECT_ERRC(bleu_tokenize("   \t"), Errc::empty_text);
  EXPECT_ERRC(sentence_bleu("", "reference text"), Errc::empty_text);
}

TEST(SentenceBleu, MatchesFrozenSacrebleuScores) {
  for (const auto& c : st::read_json(st::oracle_file("bleu_sentence_sacrebleu.json"))) {
    const auto s = sentence_bleu(c["candidate"].get<std::string>(), c["reference"].get<std::string>());
    EXPECT_NEAR(s.score, c["bleu"].get<double>(), 1e-9) << c["candidate"] << " | " << c["reference"];
  }
}

TEST(SentenceBleu, MatchesBruteForceOracleOn200Pairs) {
  std::mt19937_64 rng(20240601);
  int nonzero = 0;
  for (int i = 0; i < 200; ++i) {
    const auto [ref, cand] = perturbed_pair(rng);
    const auto got = sentence_bleu(cand, ref).score;
    const auto want = oracle::bleu(bleu_tokenize(cand), bleu_tokenize(ref));
    EXPECT_NEAR(got, want, 1e-9) << cand << " | " << ref;
    nonzero += want > 0.0;
  }
  EXPECT_GT(nonzero, 50);
}

TEST(SentenceBleu, HandComputedExample) {
  // 6 candidate vs 7 reference tokens: p1 = 5/6, p2 = 3/5, p3 = 2/4, p4 = 1/3.
  const auto b = bleu_breakdown(split("the cat sat on a mat"), split("the cat sat on the red mat"));
  EXPECT_EQ(b.precisions[0], (ClippedCount{5, 6}));
  EXPECT_EQ(b.precisions[1], (ClippedCount{3, 5}));
  EXPECT_EQ(b.precisions[2], (ClippedCount{2, 4}));
  EXPECT_EQ(b.precisions[3], (ClippedCount{1, 3}));
  EXPECT_EQ(b.candidate_length, 6u);
  EXPECT_EQ(b.reference_length, 7u);
  EXPECT_NEAR(b.brevity_penalty, std::exp(1.0 - 7.0 / 6.0), 1e-15);
  EXPECT_NEAR(b.score, std::exp(1.0 - 7.0 / 6.0) * std::pow(5.0 / 6.0 * 0.6 * 0.5 / 3.0, 0.25), 1e-15);

  const auto c = bleu_breakdown(split("the cat sat on the mat"), split("the cat sat on the red mat"));
  EXPECT_EQ(c.precisions[0], (ClippedCount{6, 6}));
  EXPECT_EQ(c.precisions[1], (ClippedCount{4, 5}));
  EXPECT_EQ(c.precisions[2], (ClippedCount{3, 4}));
  EXPECT_EQ(c.precisions[3], (ClippedCount{2, 3}));
  EXPECT_NEAR(c.score, std::exp(1.0 - 7.0 / 6.0) * std::pow(1.0 * 0.8 * 0.75 * (2.0 / 3.0), 0.25), 1e-15);
}

TEST(SentenceBleu, ClippingLimitsRepeatedTokens) {
  EXPECT_EQ(modified_precision(split("the the the the"), split("the cat"), 1), (ClippedCount{1, 4}));
  EXPECT_EQ(modified_precision(split("a b"), split("a b"), 3), (ClippedCount{0, 0}));
}

TEST(SentenceBleu, IdentityScoresOne) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const auto s = st::random_sentence(rng, 1, 15);
    EXPECT_NEAR(sentence_bleu(s, s).score, bleu_tokenize(s).size() >= 4 ? 1.0 : 0.0, 1e-15) << s;
  }
}

TEST(SentenceBleu, ZeroBelowFourTokensOrWithoutSharedFourGram) {
  EXPECT_EQ(sentence_bleu("a b c", "a b c").score, 0.0);
  EXPECT_EQ(sentence_bleu("one two three four", "four three two one").score, 0.0);
}

TEST(SentenceBleu, AppendingMatchingNgramNeverDecreasesMatches) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 200; ++i) {
    const auto ref = bleu_tokenize(st::random_sentence(rng, 6, 14));
    auto cand = bleu_tokenize(st::random_sentence(rng, 3, 10));
    const std::size_t start = rng() % (ref.size() - 3);
    for (int n = 1; n <= 4; ++n) {
      const auto before = modified_precision(cand, ref, n).matches;
      auto extended = cand;
      extended.insert(extended.end(), ref.begin() + static_cast<long>(start), ref.begin() + static_cast<long>(start) + n);
      EXPECT_GE(modified_precision(extended, ref, n).matches, before);
    }
  }
}

TEST(SentenceBleu, PairOrientationAndMetadata) {
  const SentencePair p{"id7", "the cat sat on the red mat", "the cat sat on the mat"};
  const auto s = sentence_bleu(p);
  EXPECT_EQ(s.pair_id, "id7");
  EXPECT_EQ(s.metric, MetricId::bleu);
  EXPECT_EQ(s.score, sentence_bleu("the cat sat on the mat", "the cat sat on the red mat").score);
  EXPECT_EQ(s.raw, s.score);
  EXPECT_TRUE(s.model_fingerprint.empty());
}
