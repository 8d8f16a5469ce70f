#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "stsscore/types.hpp"

namespace stsscore {

inline constexpr int kBleuMaxOrder = 4;

// mteval-v13a tokenization: punctuation and symbols are split from their
// neighbours, periods and commas only when not adjacent to a digit, and a dash
// following a digit. No case folding; apostrophes inside words are kept.
// Throws empty_text for blank input.
std::vector<std::string> bleu_tokenize(std::string_view text);

// Multiset of the n-grams of one order in a token sequence.
struct NgramProfile {
  int order = 1;
  std::unordered_map<std::string, std::size_t> counts;  // tokens joined by U+001F

  static NgramProfile build(const std::vector<std::string>& tokens, int order);
  std::size_t total() const;
};

struct ClippedCount {
  std::size_t matches = 0;
  std::size_t total = 0;

  bool operator==(const ClippedCount&) const = default;
};

// Clipped n-gram matches of `candidate` against `reference`. Requires n ≥ 1.
ClippedCount modified_precision(const std::vector<std::string>& candidate,
                                const std::vector<std::string>& reference, int n);

struct BleuBreakdown {
  std::array<ClippedCount, kBleuMaxOrder> precisions{};
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;
  double brevity_penalty = 0.0;
  double score = 0.0;
};

// Unsmoothed sentence BLEU over token lists: zero as soon as any order has no
// match or no candidate n-grams.
BleuBreakdown bleu_breakdown(const std::vector<std::string>& candidate, const std::vector<std::string>& reference);

// Sentence BLEU of `candidate` against `reference`.
MetricScore sentence_bleu(std::string_view candidate, std::string_view reference, std::string pair_id = {});

// Scores a pair with text_a as the reference and text_b as the candidate.
MetricScore sentence_bleu(const SentencePair& pair);

}  // namespace stsscore
