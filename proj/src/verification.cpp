#include "prove/verification.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace prove {

std::vector<StanceDistribution> stance_probs(const Verbalisation& v, const EvidenceSet& e,
                                             ScorerBackend& backend) {
  require(!e.empty(), "stance_probs needs a non-empty evidence set");
  std::vector<std::string> texts;
  texts.reserve(e.size());
  for (const auto& item : e.items) texts.push_back(item.passage.text);
  return call_stance(backend, v.text, texts);
}

AggregateResult aggregate_weighted_sum(std::span<const double> rho,
                                       std::span<const StanceDistribution> sigma) {
  if (rho.size() != sigma.size()) {
    fail(ErrorCode::kLengthMismatch, "weighted sum needs one relevance score per distribution");
  }
  AggregateResult r;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const double w = std::max(rho[i], 0.0);
    for (int k = 0; k < 3; ++k) r.class_values[k] += w * sigma[i].values()[k];
  }
  const double total = r.class_values[0] + r.class_values[1] + r.class_values[2];
  if (total == 0.0) {
    r.final_class = Stance::kNei;
    r.support_probability = 0.0;
    r.normalized_values = std::array<double, 3>{0.0, 0.0, 0.0};
    return r;
  }
  r.final_class = argmax_stance(r.class_values);
  r.support_probability = r.class_values[0];
  r.normalized_values = std::array<double, 3>{r.class_values[0] / total, r.class_values[1] / total,
                                              r.class_values[2] / total};
  return r;
}

AggregateResult aggregate_malon(std::span<const StanceDistribution> sigma) {
  require(!sigma.empty(), "Malon aggregation needs at least one distribution");
  bool any_supp = false, any_ref = false;
  for (const auto& s : sigma) {
    const Stance top = s.argmax();
    any_supp |= top == Stance::kSupp;
    any_ref |= top == Stance::kRef;
  }
  AggregateResult r;
  r.final_class = any_supp ? Stance::kSupp : any_ref ? Stance::kRef : Stance::kNei;
  r.class_values[static_cast<int>(r.final_class)] = 1.0;
  r.support_probability = r.final_class == Stance::kSupp ? 1.0 : 0.0;
  return r;
}

FeatureVector build_features(std::span<const Evidence> evidence) {
  std::vector<const Evidence*> ordered;
  for (const auto& e : evidence) ordered.push_back(&e);
  std::stable_sort(ordered.begin(), ordered.end(), [](const Evidence* a, const Evidence* b) {
    return ranks_before(a->scored, b->scored);
  });
  FeatureVector f;
  for (std::size_t slot = 0; slot < std::min(ordered.size(), kEvidenceSlots); ++slot) {
    const Evidence& e = *ordered[slot];
    double* out = f.values.data() + slot * kFeaturesPerSlot;
    out[0] = e.scored.relevance;
    out[1] = e.stance.supp();
    out[2] = e.stance.ref();
    out[3] = e.stance.nei();
    out[4] = std::min(static_cast<double>(e.length_chars), kLengthCap) / kLengthCap;
  }
  return f;
}

FeatureVector build_features(const EvidenceSet& e, std::span<const StanceDistribution> sigma) {
  if (sigma.size() != e.size()) {
    fail(ErrorCode::kLengthMismatch, "build_features needs one distribution per evidence item");
  }
  std::vector<Evidence> evidence;
  for (std::size_t i = 0; i < e.size(); ++i) evidence.push_back(make_evidence(e.items[i], sigma[i]));
  return build_features(evidence);
}

std::vector<std::string> stance_class_names() { return {"SUPP", "REF", "NEI"}; }
std::vector<std::string> binary_class_names() { return {"supporting", "not-supporting"}; }

AggregationModel::AggregationModel(RandomForest forest) : forest_(std::move(forest)) {
  if (forest_.num_features() != kFeatureCount || forest_.class_names() != stance_class_names()) {
    fail(ErrorCode::kSchemaMismatch,
         "aggregation model must map 25 features to SUPP/REF/NEI");
  }
}

std::array<double, 3> AggregationModel::predict(const FeatureVector& f) const {
  if (!trained()) fail(ErrorCode::kNotTrained, "aggregation model has not been trained");
  const auto p = forest_.predict_proba(f.values);
  return {p[0], p[1], p[2]};
}

AggregationModel AggregationModel::from_string(const std::string& text) {
  return AggregationModel(RandomForest::from_string(text));
}

void AggregationModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write model file " + path);
  forest_.save(out);
}

AggregationModel AggregationModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open model file " + path);
  return AggregationModel(RandomForest::load(in));
}

AggregationModel AggregationModel::constant(const std::array<double, 3>& distribution) {
  return AggregationModel(RandomForest::constant(
      kFeatureCount, stance_class_names(), {distribution.begin(), distribution.end()}));
}

AggregateResult aggregate_classifier(const FeatureVector& f, const AggregationModel& model) {
  AggregateResult r;
  r.class_values = model.predict(f);
  r.final_class = argmax_stance(r.class_values);
  r.support_probability = r.class_values[0];
  return r;
}

namespace {

void check_dataset(std::span<const LabeledFeatures> dataset) {
  require(!dataset.empty(), "training dataset is empty");
  std::set<Stance> classes;
  for (const auto& s : dataset) classes.insert(s.label);
  if (classes.size() < 2) {
    fail(ErrorCode::kSingleClassDataset, "training dataset contains a single class");
  }
}

std::vector<std::vector<double>> rows_of(std::span<const LabeledFeatures> dataset,
                                         const std::vector<std::size_t>& index) {
  std::vector<std::vector<double>> x;
  x.reserve(index.size());
  for (auto i : index) x.emplace_back(dataset[i].features.values.begin(), dataset[i].features.values.end());
  return x;
}

std::vector<int> labels_of(std::span<const LabeledFeatures> dataset,
                           const std::vector<std::size_t>& index) {
  std::vector<int> y;
  y.reserve(index.size());
  for (auto i : index) y.push_back(static_cast<int>(dataset[i].label));
  return y;
}

std::uint64_t fold_seed(std::uint64_t seed, int fold) {
  return tree_seed(seed ^ 0xA5A5A5A5A5A5A5A5ULL, static_cast<std::size_t>(fold));
}

struct FoldRun {
  std::vector<int> fold_of;
  std::vector<std::array<double, 3>> oof;
  std::vector<std::size_t> train_sizes;
};

FoldRun run_folds(std::span<const LabeledFeatures> dataset, const TrainOptions& options) {
  check_dataset(dataset);
  std::vector<int> labels;
  for (const auto& s : dataset) labels.push_back(static_cast<int>(s.label));
  FoldRun run;
  run.fold_of = stratified_folds(labels, options.folds, options.seed);
  run.oof.assign(dataset.size(), {0.0, 0.0, 0.0});
  for (int fold = 0; fold < options.folds; ++fold) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      (run.fold_of[i] == fold ? test : train).push_back(i);
    }
    run.train_sizes.push_back(train.size());
    RandomForest forest(kFeatureCount, stance_class_names(), options.params);
    const auto y = labels_of(dataset, train);
    forest.fit(rows_of(dataset, train), y, fold_seed(options.seed, fold), options.jobs);
    for (auto i : test) {
      const auto p = forest.predict_proba(dataset[i].features.values);
      run.oof[i] = {p[0], p[1], p[2]};
    }
  }
  return run;
}

int binary_index(Stance s) { return s == Stance::kSupp ? 0 : 1; }

}  // namespace

std::vector<std::array<double, 3>> cross_val_predict(std::span<const LabeledFeatures> dataset,
                                                     const TrainOptions& options) {
  return run_folds(dataset, options).oof;
}

TrainResult train_aggregation_model(std::span<const LabeledFeatures> dataset,
                                    const TrainOptions& options) {
  FoldRun run = run_folds(dataset, options);

  CrossValReport report;
  report.folds = options.folds;
  report.seed = options.seed;
  double auc_sum = 0.0;
  int auc_folds = 0;
  for (int fold = 0; fold < options.folds; ++fold) {
    std::vector<int> pred3, true3, pred2, true2, auc_labels;
    std::vector<double> auc_scores;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      if (run.fold_of[i] != fold) continue;
      const Stance predicted = argmax_stance(run.oof[i]);
      pred3.push_back(static_cast<int>(predicted));
      true3.push_back(static_cast<int>(dataset[i].label));
      pred2.push_back(binary_index(predicted));
      true2.push_back(binary_index(dataset[i].label));
      auc_scores.push_back(run.oof[i][0]);
      auc_labels.push_back(dataset[i].label == Stance::kSupp ? 1 : 0);
    }
    FoldReport fr;
    fr.train_size = run.train_sizes[static_cast<std::size_t>(fold)];
    fr.test_size = true3.size();
    fr.ternary = classification_metrics(pred3, true3, stance_class_names());
    fr.binary = classification_metrics(pred2, true2, binary_class_names());
    const bool both = std::count(auc_labels.begin(), auc_labels.end(), 1) > 0 &&
                      std::count(auc_labels.begin(), auc_labels.end(), 0) > 0;
    if (both) {
      fr.binary.auc = roc_auc(auc_scores, auc_labels);
      auc_sum += *fr.binary.auc;
      ++auc_folds;
    }
    report.mean_ternary_accuracy += fr.ternary.accuracy;
    report.mean_ternary_macro_f1 += fr.ternary.macro_f1;
    report.mean_binary_accuracy += fr.binary.accuracy;
    report.mean_binary_macro_f1 += fr.binary.macro_f1;
    report.per_fold.push_back(std::move(fr));
  }
  const double k = static_cast<double>(options.folds);
  report.mean_ternary_accuracy /= k;
  report.mean_ternary_macro_f1 /= k;
  report.mean_binary_accuracy /= k;
  report.mean_binary_macro_f1 /= k;
  if (auc_folds > 0) report.mean_binary_auc = auc_sum / auc_folds;
  report.out_of_fold = std::move(run.oof);

  std::vector<std::size_t> all(dataset.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  RandomForest forest(kFeatureCount, stance_class_names(), options.params);
  const auto y = labels_of(dataset, all);
  forest.fit(rows_of(dataset, all), y, options.seed, options.jobs);
  return TrainResult{AggregationModel(std::move(forest)), std::move(report)};
}

}  // namespace prove
