#include "prove/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "prove/error.hpp"

namespace prove {

MetricsReport classification_metrics(std::span<const int> predictions,
                                     std::span<const int> labels,
                                     const std::vector<std::string>& class_names) {
  if (predictions.size() != labels.size()) {
    fail(ErrorCode::kLengthMismatch, "predictions and labels differ in length");
  }
  require(!labels.empty(), "metrics need at least one prediction");
  const std::size_t k = class_names.size();
  require(k >= 1, "metrics need at least one class");

  MetricsReport r;
  r.count = labels.size();
  r.confusion.assign(k, std::vector<std::size_t>(k, 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int t = labels[i];
    const int p = predictions[i];
    require(t >= 0 && static_cast<std::size_t>(t) < k && p >= 0 && static_cast<std::size_t>(p) < k,
            "class index out of range");
    ++r.confusion[t][p];
    if (t == p) ++correct;
  }
  const double n = static_cast<double>(r.count);
  r.accuracy = static_cast<double>(correct) / n;

  double weighted_recall_numerator = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    ClassMetrics m;
    m.name = class_names[c];
    const std::size_t tp = r.confusion[c][c];
    std::size_t predicted = 0;
    for (std::size_t t = 0; t < k; ++t) predicted += r.confusion[t][c];
    m.support = std::accumulate(r.confusion[c].begin(), r.confusion[c].end(), std::size_t{0});
    m.precision = predicted == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(predicted);
    m.recall = m.support == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(m.support);
    m.f1 = m.precision + m.recall == 0.0 ? 0.0
                                         : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    r.macro_precision += m.precision;
    r.macro_recall += m.recall;
    r.macro_f1 += m.f1;
    const double w = static_cast<double>(m.support);
    r.weighted_precision += w * m.precision;
    r.weighted_f1 += w * m.f1;
    // support * (tp / support) is tp; summing the counts keeps the weighted
    // recall free of rounding.
    weighted_recall_numerator += static_cast<double>(tp);
    r.per_class.push_back(std::move(m));
  }
  const double kd = static_cast<double>(k);
  r.macro_precision /= kd;
  r.macro_recall /= kd;
  r.macro_f1 /= kd;
  r.weighted_precision /= n;
  r.weighted_recall = weighted_recall_numerator / n;
  r.weighted_f1 /= n;
  return r;
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    fail(ErrorCode::kLengthMismatch, "scores and labels differ in length");
  }
  std::size_t positives = 0;
  for (int l : labels) {
    require(l == 0 || l == 1, "AUC labels must be 0 or 1");
    positives += static_cast<std::size_t>(l);
  }
  const std::size_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) {
    fail(ErrorCode::kSingleClassLabels, "AUC needs both positive and negative labels");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Sum of 1-based average ranks over the positives.
  double positive_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t t = i; t <= j; ++t) {
      if (labels[order[t]] == 1) positive_rank_sum += avg_rank;
    }
    i = j + 1;
  }
  const double np = static_cast<double>(positives);
  const double nn = static_cast<double>(negatives);
  return (positive_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

double pearson_r(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) fail(ErrorCode::kLengthMismatch, "pearson_r inputs differ in length");
  require(xs.size() >= 2, "pearson_r needs at least two points");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) fail(ErrorCode::kZeroVariance, "pearson_r input has zero variance");
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

double fleiss_kappa(const std::vector<std::vector<std::size_t>>& counts) {
  require(!counts.empty(), "fleiss_kappa needs at least one item");
  const std::size_t k = counts.front().size();
  std::vector<double> category_totals(k, 0.0);
  double agreement_sum = 0.0;
  double total_ratings = 0.0;
  std::size_t items = 0;
  for (const auto& row : counts) {
    require(row.size() == k, "fleiss_kappa rows must have equal category counts");
    const double ni = static_cast<double>(std::accumulate(row.begin(), row.end(), std::size_t{0}));
    if (ni < 2.0) continue;
    double squares = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double c = static_cast<double>(row[j]);
      squares += c * c;
      category_totals[j] += c;
    }
    agreement_sum += (squares - ni) / (ni * (ni - 1.0));
    total_ratings += ni;
    ++items;
  }
  require(items > 0, "fleiss_kappa needs items with at least two ratings");
  const double observed = agreement_sum / static_cast<double>(items);
  double expected = 0.0;
  for (double t : category_totals) {
    const double p = t / total_ratings;
    expected += p * p;
  }
  if (expected == 1.0) return 1.0;
  return (observed - expected) / (1.0 - expected);
}

}  // namespace prove
