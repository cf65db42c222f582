#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace prove {

// Small deterministic generator (SplitMix64). Used instead of the standard
// distributions so that training results do not depend on the library
// implementation.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  // Uniform in [0, bound).
  std::uint64_t below(std::uint64_t bound) { return next() % bound; }
  // Uniform in [0, 1).
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

struct ForestParams {
  int num_trees = 100;
  int max_depth = 8;
  int features_per_split = 5;  // sqrt of the 25 aggregation features
  bool bootstrap = true;
  int min_samples_split = 2;
  int min_samples_leaf = 1;
};

// CART tree with Gini splits. Leaves hold class-frequency distributions.
class DecisionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;  // go left when x[feature] <= threshold
    int left = -1;
    int right = -1;
    std::vector<double> distribution;  // leaves only
  };

  DecisionTree() = default;
  explicit DecisionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

  // rows: sample indices into x (repeats allowed, as in a bootstrap draw).
  static DecisionTree fit(const std::vector<std::vector<double>>& x, std::span<const int> y,
                          std::size_t num_classes, std::vector<std::size_t> rows,
                          const ForestParams& params, SplitMix64& rng);

  const std::vector<double>& predict(std::span<const double> features) const;
  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t depth() const;

 private:
  std::vector<Node> nodes_;
};

// Bagged ensemble of decision trees; predictions average the leaf
// distributions. Each tree draws from its own generator seeded from
// (seed, tree index), so fitting trees in parallel gives the same forest.
class RandomForest {
 public:
  RandomForest() = default;
  RandomForest(std::size_t num_features, std::vector<std::string> class_names,
               ForestParams params = {});

  void fit(const std::vector<std::vector<double>>& x, std::span<const int> y,
           std::uint64_t seed, int jobs = 1);

  bool trained() const { return !trees_.empty(); }
  std::size_t num_features() const { return num_features_; }
  std::size_t num_classes() const { return class_names_.size(); }
  const std::vector<std::string>& class_names() const { return class_names_; }
  const ForestParams& params() const { return params_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<DecisionTree>& trees() const { return trees_; }

  // Errors: kNotTrained, kSchemaMismatch (wrong feature count).
  std::vector<double> predict_proba(std::span<const double> features) const;

  // Versioned text format:
  //   prove-forest 1
  //   features <n>
  //   classes <k> <name>...
  //   params <trees> <max_depth> <features_per_split> <bootstrap> <min_split> <min_leaf>
  //   seed <seed>
  //   tree <node count>
  //   split <feature> <threshold> <left> <right>   | leaf <p_1> ... <p_k>
  //   ...
  //   end
  // Numbers use shortest round-trip formatting, so save -> load -> save is
  // byte-identical.
  void save(std::ostream& out) const;
  std::string to_string() const;
  static RandomForest load(std::istream& in);
  static RandomForest from_string(const std::string& text);

  // A forest of one leaf that predicts `distribution` everywhere.
  static RandomForest constant(std::size_t num_features, std::vector<std::string> class_names,
                               std::vector<double> distribution);

 private:
  std::size_t num_features_ = 0;
  std::vector<std::string> class_names_;
  ForestParams params_;
  std::uint64_t seed_ = 0;
  std::vector<DecisionTree> trees_;
};

// Per-tree generator seed.
std::uint64_t tree_seed(std::uint64_t seed, std::size_t tree_index);

// Fold index per sample for stratified k-fold: each class is shuffled with
// the seed and dealt round-robin across folds. Every sample lands in exactly
// one fold.
std::vector<int> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed);

}  // namespace prove
