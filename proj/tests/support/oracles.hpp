// Reference implementations used to cross-check the library. Each one follows
// the textbook definition as literally as possible and shares no code with
// the library under test.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

struct Window {
  std::size_t n;
  std::size_t i;
  std::string text;
};

// Every (n, i) with 0 <= i <= |S| - n, in n-then-i order.
inline std::vector<Window> windows(const std::vector<std::string>& s,
                                   const std::vector<std::size_t>& sizes) {
  std::vector<Window> out;
  for (std::size_t n : sizes) {
    for (std::size_t i = 0; i + n <= s.size(); ++i) {
      std::string text;
      for (std::size_t j = i; j < i + n; ++j) {
        if (j > i) text += " ";
        text += s[j];
      }
      out.push_back({n, i, text});
    }
  }
  return out;
}

struct Span {
  std::size_t start;
  std::size_t size;
  double rho;
};

// Indices kept by the pairwise rule: i goes iff some overlapping j has a
// strictly larger score.
inline std::vector<std::size_t> dedup(const std::vector<Span>& p) {
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < p.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < p.size(); ++j) {
      const bool overlap = p[i].start < p[j].start + p[j].size && p[j].start < p[i].start + p[i].size;
      if (j != i && overlap && p[j].rho > p[i].rho) dominated = true;
    }
    if (!dominated) kept.push_back(i);
  }
  return kept;
}

// Best sum of scores over subsets with size in [min_size, max_size].
inline double best_subset_sum(const std::vector<double>& rho, std::size_t min_size,
                              std::size_t max_size) {
  double best = -std::numeric_limits<double>::infinity();
  const std::size_t n = rho.size();
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    const auto size = static_cast<std::size_t>(__builtin_popcount(mask));
    if (size < min_size || size > max_size) continue;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) sum += rho[i];
    }
    best = std::max(best, sum);
  }
  return best;
}

// Stance codes: 0 SUPP, 1 REF, 2 NEI.
inline std::pair<int, double> malon(const std::vector<int>& argmaxes) {
  for (int a : argmaxes) {
    if (a == 0) return {0, 1.0};
  }
  for (int a : argmaxes) {
    if (a == 1) return {1, 0.0};
  }
  return {2, 0.0};
}

struct WeightedSum {
  std::array<double, 3> sigma;
  int z;
  double y;
};

inline WeightedSum weighted_sum(const std::vector<double>& rho,
                                const std::vector<std::array<double, 3>>& sigma) {
  WeightedSum r{{0.0, 0.0, 0.0}, 2, 0.0};
  for (int k = 0; k < 3; ++k) {
    double total = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
      const double w = rho[i] > 0.0 ? rho[i] : 0.0;
      total += w * sigma[i][static_cast<std::size_t>(k)];
    }
    r.sigma[static_cast<std::size_t>(k)] = total;
  }
  if (r.sigma[0] == 0.0 && r.sigma[1] == 0.0 && r.sigma[2] == 0.0) return r;
  r.z = 0;
  if (r.sigma[1] > r.sigma[static_cast<std::size_t>(r.z)]) r.z = 1;
  if (r.sigma[2] > r.sigma[static_cast<std::size_t>(r.z)]) r.z = 2;
  r.y = r.sigma[0];
  return r;
}

inline std::vector<std::vector<std::size_t>> confusion(const std::vector<int>& pred,
                                                       const std::vector<int>& truth,
                                                       std::size_t classes) {
  std::vector<std::vector<std::size_t>> m(classes, std::vector<std::size_t>(classes, 0));
  for (std::size_t i = 0; i < pred.size(); ++i) {
    ++m[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(pred[i])];
  }
  return m;
}

struct ClassScores {
  double precision, recall, f1;
};

inline ClassScores class_scores(const std::vector<int>& pred, const std::vector<int>& truth,
                                int c) {
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == c && truth[i] == c) tp += 1;
    if (pred[i] == c && truth[i] != c) fp += 1;
    if (pred[i] != c && truth[i] == c) fn += 1;
  }
  const double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  const double r = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
  return {p, r, f};
}

// P(score_pos > score_neg) + 0.5 P(tie) over all positive/negative pairs.
inline double auc_pairs(const std::vector<double>& scores, const std::vector<int>& labels) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// Synthetic aggregation data with a known rule: the top evidence slot decides.
// SUPP when its relevance and SUPP probability are both high, REF when its REF
// probability is high, NEI otherwise.
struct SyntheticSample {
  std::array<double, 25> x;
  int label;
};

inline int threshold_rule(const std::array<double, 25>& x) {
  if (x[0] > 0.3 && x[1] > 0.5) return 0;
  if (x[2] > 0.5) return 1;
  return 2;
}

inline std::vector<SyntheticSample> synthetic_dataset(std::size_t n, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<SyntheticSample> out;
  for (std::size_t s = 0; s < n; ++s) {
    SyntheticSample sample{};
    const int target = static_cast<int>(s % 3);
    for (std::size_t slot = 0; slot < 5; ++slot) {
      double* f = sample.x.data() + slot * 5;
      f[0] = unit(rng) * 2.0 - 1.0;
      double a = unit(rng), b = unit(rng), c = unit(rng);
      if (slot == 0) {
        // Push the top slot away from the rule's thresholds.
        if (target == 0) {
          f[0] = 0.45 + 0.55 * unit(rng);
          a = 4.0 + unit(rng);
        } else if (target == 1) {
          f[0] = unit(rng) * 0.2 - 0.1;
          b = 4.0 + unit(rng);
        } else {
          f[0] = unit(rng) * 0.2 - 1.0;
          c = 4.0 + unit(rng);
        }
      }
      const double total = a + b + c;
      f[1] = a / total;
      f[2] = b / total;
      f[3] = c / total;
      f[4] = unit(rng);
    }
    sample.label = threshold_rule(sample.x);
    out.push_back(sample);
  }
  return out;
}

}  // namespace oracle
