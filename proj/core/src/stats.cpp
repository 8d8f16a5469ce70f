#include "stsscore/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "stsscore/error.hpp"
#include "stsscore/text.hpp"

namespace stsscore {

namespace {

void check_lengths(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) fail(Errc::length_mismatch, "sequences have different lengths");
  if (xs.size() < 2) fail(Errc::invalid_argument, "correlation needs at least two values");
}

bool is_constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

double mean_of(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

void check_binary(std::span<const double> scores, std::span<const double> labels) {
  if (scores.size() != labels.size()) fail(Errc::length_mismatch, "scores and labels have different lengths");
  for (double l : labels)
    if (l != 0.0 && l != 1.0) fail(Errc::invalid_argument, "binary labels must be 0 or 1");
}

}  // namespace

std::optional<double> pearson(std::span<const double> xs, std::span<const double> ys) {
  check_lengths(xs, ys);
  if (is_constant(xs) || is_constant(ys)) return std::nullopt;
  const double mx = mean_of(xs);
  const double my = mean_of(ys);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> spearman(std::span<const double> xs, std::span<const double> ys) {
  check_lengths(xs, ys);
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  return pearson(rx, ry);
}

CorrelationReport correlate(std::span<const double> scores, std::span<const double> labels) {
  return CorrelationReport{pearson(scores, labels), spearman(scores, labels), scores.size()};
}

std::pair<ClassSummary, ClassSummary> class_summary(std::span<const double> scores, std::span<const double> labels) {
  check_binary(scores, labels);
  std::array<std::vector<double>, 2> by_class;
  for (std::size_t i = 0; i < scores.size(); ++i) by_class[labels[i] == 1.0 ? 1 : 0].push_back(scores[i]);
  std::array<ClassSummary, 2> out;
  for (int k = 0; k < 2; ++k) {
    const auto& v = by_class[static_cast<std::size_t>(k)];
    if (v.empty()) fail(Errc::empty_class, "class " + std::to_string(k) + " has no scores");
    ClassSummary s;
    s.class_label = k;
    s.n = v.size();
    s.mean = mean_of(v);
    if (v.size() > 1) {
      double ss = 0.0;
      for (double x : v) ss += (x - s.mean) * (x - s.mean);
      s.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    out[static_cast<std::size_t>(k)] = s;
  }
  return {out[0], out[1]};
}

RocResult roc_auc(std::span<const double> scores, std::span<const double> labels) {
  check_binary(scores, labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::size_t n_pos = 0;
  for (double l : labels) n_pos += l == 1.0 ? 1 : 0;
  const std::size_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) fail(Errc::single_class, "ROC needs both classes");

  RocResult r;
  r.points.push_back({0.0, 0.0});
  // Twice the Mann–Whitney count, so ties (worth ½) stay integral.
  std::uint64_t twice_wins = 0;
  std::size_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t pos_here = 0, neg_here = 0;
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1.0 ? pos_here : neg_here) += 1;
      ++j;
    }
    // Negatives at this threshold lose to every positive above it and tie with those here.
    twice_wins += neg_here * (2 * tp + pos_here);
    tp += pos_here;
    fp += neg_here;
    r.points.push_back({static_cast<double>(fp) / static_cast<double>(n_neg), static_cast<double>(tp) / static_cast<double>(n_pos)});
    i = j;
  }
  // One correctly rounded division of two exactly representable integers.
  r.auc = static_cast<double>(twice_wins) / static_cast<double>(2 * static_cast<std::uint64_t>(n_pos) * n_neg);
  return r;
}

double pair_length(const SentencePair& pair) {
  return (static_cast<double>(text::char_count(pair.text_a)) + static_cast<double>(text::char_count(pair.text_b))) / 2.0;
}

double median(std::vector<double> values) {
  if (values.empty()) fail(Errc::invalid_argument, "median of an empty sequence");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

LengthSplit median_length_split(const LabeledDataset& dataset) {
  if (dataset.pairs.empty()) fail(Errc::invalid_argument, "cannot split an empty dataset");
  std::vector<double> lengths;
  lengths.reserve(dataset.size());
  for (const auto& lp : dataset.pairs) lengths.push_back(pair_length(lp.pair));
  LengthSplit s;
  s.median = median(lengths);
  s.shorter.name = s.longer.name = dataset.name;
  s.shorter.split = s.longer.split = dataset.split;
  for (std::size_t i = 0; i < dataset.size(); ++i)
    (lengths[i] < s.median ? s.shorter : s.longer).pairs.push_back(dataset.pairs[i]);
  return s;
}

}  // namespace stsscore
