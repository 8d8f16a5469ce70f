#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "stsscore/types.hpp"

namespace stsscore {

struct CorrelationReport {
  std::optional<double> pearson_r;     // nullopt when either input is constant
  std::optional<double> spearman_rho;  // nullopt when either input's ranks are constant
  std::size_t n = 0;
};

struct ClassSummary {
  int class_label = 0;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (divisor n−1); 0 when n = 1
  std::size_t n = 0;
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;

  bool operator==(const RocPoint&) const = default;
};

struct RocResult {
  std::vector<RocPoint> points;  // from (0,0) to (1,1), nondecreasing
  double auc = 0.0;
};

// Pearson correlation. Throws length_mismatch for unequal lengths and
// invalid_argument for fewer than two values; returns nullopt (undefined)
// when either sequence is constant.
std::optional<double> pearson(std::span<const double> xs, std::span<const double> ys);

// Pearson correlation of average ranks (ties share the mean of their ranks).
std::optional<double> spearman(std::span<const double> xs, std::span<const double> ys);

// 1-based average ranks.
std::vector<double> average_ranks(std::span<const double> values);

CorrelationReport correlate(std::span<const double> scores, std::span<const double> labels);

// Per-class mean and sample standard deviation. Labels must be 0 or 1.
// Throws empty_class when a class has no scores.
std::pair<ClassSummary, ClassSummary> class_summary(std::span<const double> scores, std::span<const double> labels);

// ROC curve from a threshold sweep over the distinct scores (descending) and
// AUC as the Mann–Whitney statistic with ties counted one half.
// Throws single_class unless both classes are present.
RocResult roc_auc(std::span<const double> scores, std::span<const double> labels);

// Mean of the two texts' code-point counts.
double pair_length(const SentencePair& pair);

struct LengthSplit {
  LabeledDataset shorter;  // pair length strictly below the median
  LabeledDataset longer;   // pair length equal to or above the median
  double median = 0.0;
};

// Throws invalid_argument on an empty dataset.
LengthSplit median_length_split(const LabeledDataset& dataset);

double median(std::vector<double> values);

}  // namespace stsscore
