#include "stsscore/metrics/bleu.hpp"

#include <algorithm>
#include <cmath>

#include "stsscore/error.hpp"
#include "stsscore/text.hpp"

namespace stsscore {

namespace {

using U32 = std::u32string;

void replace_all(U32& s, std::u32string_view from, std::u32string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != U32::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

bool is_digit(char32_t c) { return c >= U'0' && c <= U'9'; }

// Matches [\{-\~\[-\` -\&\(-\+\:-\@\/].
bool is_split_symbol(char32_t c) {
  return (c >= U'{' && c <= U'~') || (c >= U'[' && c <= U'`') || (c >= U' ' && c <= U'&') ||
         (c >= U'(' && c <= U'+') || (c >= U':' && c <= U'@') || c == U'/';
}

bool is_period_or_comma(char32_t c) { return c == U'.' || c == U','; }

// Characters Python's str.split() treats as separators.
bool is_split_space(char32_t c) {
  return (c >= 0x09 && c <= 0x0D) || (c >= 0x1C && c <= 0x20) || c == 0x85 || c == 0xA0 || c == 0x1680 ||
         (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 || c == 0x202F || c == 0x205F || c == 0x3000;
}

// Non-overlapping left-to-right substitution of a two-character pattern, as
// re.sub does: a match consumes both characters.
template <typename First, typename Second, typename Emit>
U32 substitute_pairs(const U32& s, First first, Second second, Emit emit) {
  U32 out;
  out.reserve(s.size() + s.size() / 2);
  std::size_t i = 0;
  while (i < s.size()) {
    if (i + 1 < s.size() && first(s[i]) && second(s[i + 1])) {
      emit(out, s[i], s[i + 1]);
      i += 2;
    } else {
      out.push_back(s[i]);
      ++i;
    }
  }
  return out;
}

std::string join_ngram(const std::vector<std::string>& tokens, std::size_t start, int order) {
  std::string key;
  for (int k = 0; k < order; ++k) {
    if (k) key.push_back('\x1f');
    key += tokens[start + static_cast<std::size_t>(k)];
  }
  return key;
}

}  // namespace

std::vector<std::string> bleu_tokenize(std::string_view text) {
  if (text::is_blank(text)) fail(Errc::empty_text, "cannot tokenize empty text");
  U32 line = text::to_u32(text);
  replace_all(line, U"<skipped>", U"");
  replace_all(line, U"-\n", U"");
  replace_all(line, U"\n", U" ");
  if (line.find(U'&') != U32::npos) {
    replace_all(line, U"&quot;", U"\"");
    replace_all(line, U"&amp;", U"&");
    replace_all(line, U"&lt;", U"<");
    replace_all(line, U"&gt;", U">");
  }
  line = U" " + line + U" ";

  U32 spaced;
  spaced.reserve(line.size() * 2);
  for (char32_t c : line) {
    if (is_split_symbol(c)) {
      spaced.push_back(U' ');
      spaced.push_back(c);
      spaced.push_back(U' ');
    } else {
      spaced.push_back(c);
    }
  }
  spaced = substitute_pairs(
      spaced, [](char32_t c) { return !is_digit(c); }, is_period_or_comma,
      [](U32& out, char32_t a, char32_t b) { out += {a, U' ', b, U' '}; });
  spaced = substitute_pairs(
      spaced, is_period_or_comma, [](char32_t c) { return !is_digit(c); },
      [](U32& out, char32_t a, char32_t b) { out += {U' ', a, U' ', b}; });
  spaced = substitute_pairs(
      spaced, is_digit, [](char32_t c) { return c == U'-'; },
      [](U32& out, char32_t a, char32_t b) { out += {a, U' ', b, U' '}; });

  std::vector<std::string> tokens;
  U32 cur;
  for (char32_t c : spaced) {
    if (is_split_space(c)) {
      if (!cur.empty()) tokens.push_back(text::to_utf8(cur)), cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) tokens.push_back(text::to_utf8(cur));
  return tokens;
}

NgramProfile NgramProfile::build(const std::vector<std::string>& tokens, int order) {
  if (order < 1) fail(Errc::invalid_argument, "n-gram order must be at least 1");
  NgramProfile p;
  p.order = order;
  const auto n = static_cast<std::size_t>(order);
  if (tokens.size() >= n)
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) ++p.counts[join_ngram(tokens, i, order)];
  return p;
}

std::size_t NgramProfile::total() const {
  std::size_t t = 0;
  for (const auto& [_, c] : counts) t += c;
  return t;
}

ClippedCount modified_precision(const std::vector<std::string>& candidate, const std::vector<std::string>& reference,
                                int n) {
  const auto cand = NgramProfile::build(candidate, n);
  const auto ref = NgramProfile::build(reference, n);
  ClippedCount out;
  for (const auto& [gram, count] : cand.counts) {
    out.total += count;
    auto it = ref.counts.find(gram);
    if (it != ref.counts.end()) out.matches += std::min(count, it->second);
  }
  return out;
}

BleuBreakdown bleu_breakdown(const std::vector<std::string>& candidate, const std::vector<std::string>& reference) {
  BleuBreakdown b;
  b.candidate_length = candidate.size();
  b.reference_length = reference.size();
  bool zero = candidate.empty();
  double log_sum = 0.0;
  for (int n = 1; n <= kBleuMaxOrder; ++n) {
    const auto p = modified_precision(candidate, reference, n);
    b.precisions[static_cast<std::size_t>(n - 1)] = p;
    if (p.total == 0 || p.matches == 0) zero = true;
    else log_sum += std::log(static_cast<double>(p.matches) / static_cast<double>(p.total));
  }
  if (!candidate.empty()) {
    const double c = static_cast<double>(b.candidate_length);
    const double r = static_cast<double>(b.reference_length);
    b.brevity_penalty = c > r ? 1.0 : std::exp(1.0 - r / c);
  }
  b.score = zero ? 0.0 : b.brevity_penalty * std::exp(log_sum / kBleuMaxOrder);
  return b;
}

MetricScore sentence_bleu(std::string_view candidate, std::string_view reference, std::string pair_id) {
  const auto cand = bleu_tokenize(candidate);
  const auto ref = bleu_tokenize(reference);
  const double score = bleu_breakdown(cand, ref).score;
  return MetricScore{std::move(pair_id), MetricId::bleu, clamp01(score), score, ""};
}

MetricScore sentence_bleu(const SentencePair& pair) { return sentence_bleu(pair.text_b, pair.text_a, pair.id); }

}  // namespace stsscore
