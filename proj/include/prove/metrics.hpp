#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace prove {

struct ClassMetrics {
  std::string name;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;  // number of true labels of this class
};

struct MetricsReport {
  std::size_t count = 0;
  double accuracy = 0.0;
  std::vector<ClassMetrics> per_class;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  // Weighted by true-label frequency.
  double weighted_precision = 0.0;
  double weighted_recall = 0.0;
  double weighted_f1 = 0.0;
  // confusion[true][predicted]
  std::vector<std::vector<std::size_t>> confusion;
  std::optional<double> auc;
  std::optional<double> pearson_r;
};

// Labels are class indices in [0, class_names.size()). Precision of a class
// that is never predicted is 0, as is F1 when precision + recall = 0.
// Errors: kLengthMismatch, kInvalidArgument (empty input, index out of range).
MetricsReport classification_metrics(std::span<const int> predictions,
                                     std::span<const int> labels,
                                     const std::vector<std::string>& class_names);

// Area under the ROC curve: P(score_pos > score_neg) + 0.5 P(equal), computed
// from average ranks. Labels are 0/1. Errors: kSingleClassLabels,
// kLengthMismatch.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

// Product-moment correlation. Errors: kInvalidArgument (fewer than two
// points), kLengthMismatch, kZeroVariance.
double pearson_r(std::span<const double> xs, std::span<const double> ys);

// Fleiss' kappa from per-item category counts. Items may have different
// numbers of ratings; items with fewer than two ratings are skipped.
double fleiss_kappa(const std::vector<std::vector<std::size_t>>& counts);

}  // namespace prove
