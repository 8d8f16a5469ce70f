#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stsscore::oracle {

namespace {

std::vector<std::vector<std::string>> ngrams(const std::vector<std::string>& tokens, std::size_t n) {
  std::vector<std::vector<std::string>> out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) out.emplace_back(tokens.begin() + i, tokens.begin() + i + n);
  return out;
}

std::size_t count_of(const std::vector<std::vector<std::string>>& grams, const std::vector<std::string>& g) {
  return static_cast<std::size_t>(std::count(grams.begin(), grams.end(), g));
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

double bleu(const std::vector<std::string>& candidate, const std::vector<std::string>& reference) {
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto cand = ngrams(candidate, n);
    const auto ref = ngrams(reference, n);
    if (cand.empty()) return 0.0;
    std::size_t matched = 0;
    std::vector<std::vector<std::string>> seen;
    for (const auto& g : cand) {
      if (std::find(seen.begin(), seen.end(), g) != seen.end()) continue;
      seen.push_back(g);
      matched += std::min(count_of(cand, g), count_of(ref, g));
    }
    if (matched == 0) return 0.0;
    log_sum += std::log(static_cast<double>(matched) / static_cast<double>(cand.size()));
  }
  const double c = static_cast<double>(candidate.size());
  const double r = static_cast<double>(reference.size());
  const double bp = c < r ? std::exp(1.0 - r / c) : 1.0;
  return bp * std::exp(log_sum / 4.0);
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

std::vector<double> ranks(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double below = 0.0, equal = 0.0;
    for (double v : x) {
      if (v < x[i]) below += 1.0;
      if (v == x[i]) equal += 1.0;
    }
    r[i] = below + (equal + 1.0) / 2.0;
  }
  return r;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) { return pearson(ranks(x), ranks(y)); }

Fraction auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::uint64_t twice = 0, pos = 0, neg = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == 1) ++pos;
    else ++neg;
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      if (scores[i] > scores[j]) twice += 2;
      else if (scores[i] == scores[j]) twice += 1;
    }
  }
  return {twice, 2 * pos * neg};
}

double cosine(const std::vector<double>& u, const std::vector<double>& v) {
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

Greedy greedy(const std::vector<std::vector<double>>& reference, const std::vector<std::vector<double>>& candidate) {
  Greedy g;
  for (const auto& r : reference) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& c : candidate) best = std::max(best, cosine(r, c));
    g.recall += best;
  }
  g.recall /= static_cast<double>(reference.size());
  for (const auto& c : candidate) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& r : reference) best = std::max(best, cosine(r, c));
    g.precision += best;
  }
  g.precision /= static_cast<double>(candidate.size());
  g.f1 = g.precision + g.recall == 0.0 ? 0.0 : 2.0 * g.precision * g.recall / (g.precision + g.recall);
  return g;
}

}  // namespace stsscore::oracle
