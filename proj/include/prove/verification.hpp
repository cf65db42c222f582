#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "prove/backend.hpp"
#include "prove/core.hpp"
#include "prove/forest.hpp"
#include "prove/metrics.hpp"
#include "prove/selection.hpp"

namespace prove {

// Per-evidence stance distributions, one per evidence item, in order.
// Precondition: evidence is non-empty (an empty evidence set is handled by the
// caller with an NEI verdict).
std::vector<StanceDistribution> stance_probs(const Verbalisation& v, const EvidenceSet& e,
                                             ScorerBackend& backend);

// sigma^k = sum_i max(rho_i, 0) * sigma_i^k; z = argmax_k sigma^k; y = sigma^SUPP.
// When every weight clamps to zero the verdict is NEI with y = 0.
AggregateResult aggregate_weighted_sum(std::span<const double> rho,
                                       std::span<const StanceDistribution> sigma);

// SUPP if any evidence is most likely SUPP, else REF if any is most likely
// REF, else NEI; y is 1 for SUPP and 0 otherwise.
AggregateResult aggregate_malon(std::span<const StanceDistribution> sigma);

inline constexpr std::size_t kEvidenceSlots = 5;
inline constexpr std::size_t kFeaturesPerSlot = 5;
inline constexpr std::size_t kFeatureCount = kEvidenceSlots * kFeaturesPerSlot;
inline constexpr double kLengthCap = 2000.0;

// Per slot, in descending relevance: (rho, sigma_SUPP, sigma_REF, sigma_NEI,
// min(chars, 2000) / 2000). Missing slots are zero.
struct FeatureVector {
  std::array<double, kFeatureCount> values{};

  bool operator==(const FeatureVector&) const = default;
};

FeatureVector build_features(std::span<const Evidence> evidence);
FeatureVector build_features(const EvidenceSet& e, std::span<const StanceDistribution> sigma);

// Classifier over FeatureVector predicting a distribution over SUPP/REF/NEI.
class AggregationModel {
 public:
  AggregationModel() = default;
  explicit AggregationModel(RandomForest forest);

  bool trained() const { return forest_.trained(); }
  const RandomForest& forest() const { return forest_; }

  // Errors: kNotTrained, kSchemaMismatch.
  std::array<double, 3> predict(const FeatureVector& f) const;

  std::string to_string() const { return forest_.to_string(); }
  static AggregationModel from_string(const std::string& text);
  void save(const std::string& path) const;
  static AggregationModel load(const std::string& path);

  // Predicts the same distribution for every input.
  static AggregationModel constant(const std::array<double, 3>& distribution);

 private:
  RandomForest forest_;
};

// theta = model(f); z = argmax theta; y = theta^SUPP.
AggregateResult aggregate_classifier(const FeatureVector& f, const AggregationModel& model);

struct LabeledFeatures {
  FeatureVector features;
  Stance label = Stance::kNei;
};

struct FoldReport {
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  MetricsReport ternary;
  // SUPP versus the rest; the AUC uses theta^SUPP when both classes occur.
  MetricsReport binary;
};

struct CrossValReport {
  int folds = 0;
  std::uint64_t seed = 0;
  std::vector<FoldReport> per_fold;
  double mean_ternary_accuracy = 0.0;
  double mean_ternary_macro_f1 = 0.0;
  double mean_binary_accuracy = 0.0;
  double mean_binary_macro_f1 = 0.0;
  std::optional<double> mean_binary_auc;  // over folds where it is defined
  // Out-of-fold predictions for every sample, in input order.
  std::vector<std::array<double, 3>> out_of_fold;
};

struct TrainOptions {
  int folds = 5;
  std::uint64_t seed = 0;
  ForestParams params;
  int jobs = 1;
};

struct TrainResult {
  AggregationModel model;  // fitted on the whole dataset
  CrossValReport report;
};

// Stratified k-fold cross-validation followed by a final fit on all samples.
// Deterministic for a fixed seed. Errors: kInvalidArgument (empty dataset),
// kSingleClassDataset.
TrainResult train_aggregation_model(std::span<const LabeledFeatures> dataset,
                                    const TrainOptions& options);

// Out-of-fold class distributions only (no final fit).
std::vector<std::array<double, 3>> cross_val_predict(std::span<const LabeledFeatures> dataset,
                                                     const TrainOptions& options);

std::vector<std::string> stance_class_names();
std::vector<std::string> binary_class_names();

}  // namespace prove
