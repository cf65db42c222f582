#include "prove/forest.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "prove/error.hpp"

namespace prove {

std::uint64_t tree_seed(std::uint64_t seed, std::size_t tree_index) {
  SplitMix64 mix(seed ^ (0xD1B54A32D192ED03ULL * (static_cast<std::uint64_t>(tree_index) + 1)));
  return mix.next();
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<std::vector<double>>& x, std::span<const int> y,
              std::size_t num_classes, const ForestParams& params, SplitMix64& rng)
      : x_(x), y_(y), k_(num_classes), params_(params), rng_(rng) {
    num_features_ = x.empty() ? 0 : x.front().size();
  }

  std::vector<DecisionTree::Node> build(std::vector<std::size_t> rows) {
    grow(rows, 0);
    return std::move(nodes_);
  }

 private:
  std::vector<double> counts(const std::vector<std::size_t>& rows) const {
    std::vector<double> c(k_, 0.0);
    for (auto r : rows) c[static_cast<std::size_t>(y_[r])] += 1.0;
    return c;
  }

  static double impurity_mass(const std::vector<double>& c, double n) {
    // n * gini = n - sum(c^2) / n
    if (n == 0.0) return 0.0;
    double sq = 0.0;
    for (double v : c) sq += v * v;
    return n - sq / n;
  }

  int make_leaf(const std::vector<double>& c, double n) {
    DecisionTree::Node leaf;
    leaf.distribution.resize(k_);
    for (std::size_t i = 0; i < k_; ++i) leaf.distribution[i] = c[i] / n;
    nodes_.push_back(std::move(leaf));
    return static_cast<int>(nodes_.size() - 1);
  }

  int grow(std::vector<std::size_t>& rows, int depth) {
    const auto c = counts(rows);
    const double n = static_cast<double>(rows.size());
    const bool pure = std::count_if(c.begin(), c.end(), [](double v) { return v > 0.0; }) <= 1;
    if (pure || depth >= params_.max_depth ||
        rows.size() < static_cast<std::size_t>(params_.min_samples_split)) {
      return make_leaf(c, n);
    }

    // Candidate features: a partial Fisher-Yates draw without replacement.
    std::vector<std::size_t> features(num_features_);
    std::iota(features.begin(), features.end(), std::size_t{0});
    const std::size_t draw =
        std::min<std::size_t>(num_features_, static_cast<std::size_t>(std::max(1, params_.features_per_split)));
    for (std::size_t i = 0; i < draw; ++i) {
      const std::size_t j = i + rng_.below(num_features_ - i);
      std::swap(features[i], features[j]);
    }

    const double parent = impurity_mass(c, n);
    double best_gain = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;
    const auto min_leaf = static_cast<std::size_t>(std::max(1, params_.min_samples_leaf));
    std::vector<std::size_t> sorted = rows;
    for (std::size_t fi = 0; fi < draw; ++fi) {
      const std::size_t f = features[fi];
      std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
        if (x_[a][f] != x_[b][f]) return x_[a][f] < x_[b][f];
        return a < b;
      });
      std::vector<double> left(k_, 0.0);
      std::vector<double> right = c;
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        const auto label = static_cast<std::size_t>(y_[sorted[i]]);
        left[label] += 1.0;
        right[label] -= 1.0;
        const double lo = x_[sorted[i]][f];
        const double hi = x_[sorted[i + 1]][f];
        if (lo == hi) continue;
        const std::size_t nl = i + 1;
        const std::size_t nr = sorted.size() - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double child = impurity_mass(left, static_cast<double>(nl)) +
                             impurity_mass(right, static_cast<double>(nr));
        const double gain = parent - child;
        if (gain > best_gain + 1e-12) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          double mid = lo + (hi - lo) / 2.0;
          if (!(mid < hi)) mid = lo;
          best_threshold = mid;
        }
      }
    }
    if (best_feature < 0) return make_leaf(c, n);

    std::vector<std::size_t> left_rows, right_rows;
    for (auto r : rows) {
      (x_[r][static_cast<std::size_t>(best_feature)] <= best_threshold ? left_rows : right_rows)
          .push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    const int index = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    nodes_[index].feature = best_feature;
    nodes_[index].threshold = best_threshold;
    const int l = grow(left_rows, depth + 1);
    const int r = grow(right_rows, depth + 1);
    nodes_[index].left = l;
    nodes_[index].right = r;
    return index;
  }

  const std::vector<std::vector<double>>& x_;
  std::span<const int> y_;
  std::size_t k_;
  std::size_t num_features_ = 0;
  const ForestParams& params_;
  SplitMix64& rng_;
  std::vector<DecisionTree::Node> nodes_;
};

}  // namespace

DecisionTree DecisionTree::fit(const std::vector<std::vector<double>>& x, std::span<const int> y,
                               std::size_t num_classes, std::vector<std::size_t> rows,
                               const ForestParams& params, SplitMix64& rng) {
  require(!rows.empty(), "cannot fit a tree on zero rows");
  TreeBuilder builder(x, y, num_classes, params, rng);
  return DecisionTree(builder.build(std::move(rows)));
}

const std::vector<double>& DecisionTree::predict(std::span<const double> features) const {
  std::size_t i = 0;
  for (;;) {
    const Node& node = nodes_[i];
    if (node.feature < 0) return node.distribution;
    i = static_cast<std::size_t>(features[static_cast<std::size_t>(node.feature)] <= node.threshold
                                     ? node.left
                                     : node.right);
  }
}

std::size_t DecisionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::size_t deepest = 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack = {{0, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (nodes_[i].feature >= 0) {
      stack.push_back({static_cast<std::size_t>(nodes_[i].left), d + 1});
      stack.push_back({static_cast<std::size_t>(nodes_[i].right), d + 1});
    }
  }
  return deepest;
}

RandomForest::RandomForest(std::size_t num_features, std::vector<std::string> class_names,
                           ForestParams params)
    : num_features_(num_features), class_names_(std::move(class_names)), params_(params) {
  require(num_features_ > 0, "forest needs at least one feature");
  require(class_names_.size() >= 2, "forest needs at least two classes");
  require(params_.num_trees >= 1, "forest needs at least one tree");
  require(params_.max_depth >= 0, "max_depth must not be negative");
}

void RandomForest::fit(const std::vector<std::vector<double>>& x, std::span<const int> y,
                       std::uint64_t seed, int jobs) {
  if (x.size() != y.size()) fail(ErrorCode::kLengthMismatch, "features and labels differ in length");
  require(!x.empty(), "cannot fit a forest on an empty dataset");
  for (const auto& row : x) {
    if (row.size() != num_features_) {
      fail(ErrorCode::kSchemaMismatch, "training row has " + std::to_string(row.size()) +
                                           " features, expected " + std::to_string(num_features_));
    }
  }
  for (int label : y) {
    require(label >= 0 && static_cast<std::size_t>(label) < num_classes(), "label out of range");
  }
  seed_ = seed;
  const auto count = static_cast<std::size_t>(params_.num_trees);
  std::vector<DecisionTree> trees(count);
  auto fit_one = [&](std::size_t t) {
    SplitMix64 rng(tree_seed(seed, t));
    std::vector<std::size_t> rows(x.size());
    if (params_.bootstrap) {
      for (auto& r : rows) r = rng.below(x.size());
    } else {
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    trees[t] = DecisionTree::fit(x, y, num_classes(), std::move(rows), params_, rng);
  };
  const auto workers = static_cast<std::size_t>(std::clamp(jobs, 1, params_.num_trees));
  if (workers == 1) {
    for (std::size_t t = 0; t < count; ++t) fit_one(t);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t t = w; t < count; t += workers) fit_one(t);
      });
    }
    for (auto& th : pool) th.join();
  }
  trees_ = std::move(trees);
}

std::vector<double> RandomForest::predict_proba(std::span<const double> features) const {
  if (!trained()) fail(ErrorCode::kNotTrained, "aggregation model has not been trained");
  if (features.size() != num_features_) {
    fail(ErrorCode::kSchemaMismatch, "model expects " + std::to_string(num_features_) +
                                         " features, got " + std::to_string(features.size()));
  }
  std::vector<double> total(num_classes(), 0.0);
  for (const auto& tree : trees_) {
    const auto& d = tree.predict(features);
    for (std::size_t k = 0; k < total.size(); ++k) total[k] += d[k];
  }
  for (double& v : total) v /= static_cast<double>(trees_.size());
  return total;
}

RandomForest RandomForest::constant(std::size_t num_features, std::vector<std::string> class_names,
                                    std::vector<double> distribution) {
  require(distribution.size() == class_names.size(), "distribution must cover every class");
  ForestParams params;
  params.num_trees = 1;
  params.max_depth = 0;
  RandomForest forest(num_features, std::move(class_names), params);
  DecisionTree::Node leaf;
  leaf.distribution = std::move(distribution);
  forest.trees_.push_back(DecisionTree({leaf}));
  return forest;
}

namespace {

std::string number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& token) {
  double v = 0.0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    fail(ErrorCode::kSchemaError, "model file: bad number '" + token + "'");
  }
  return v;
}

template <typename Int>
Int parse_int(const std::string& token) {
  Int v{};
  auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    fail(ErrorCode::kSchemaError, "model file: bad integer '" + token + "'");
  }
  return v;
}

void expect(std::istream& in, const std::string& word) {
  std::string got;
  if (!(in >> got) || got != word) {
    fail(ErrorCode::kSchemaError, "model file: expected '" + word + "', found '" + got + "'");
  }
}

std::string token(std::istream& in) {
  std::string t;
  if (!(in >> t)) fail(ErrorCode::kSchemaError, "model file: unexpected end of input");
  return t;
}

}  // namespace

void RandomForest::save(std::ostream& out) const {
  if (!trained()) fail(ErrorCode::kNotTrained, "cannot save an untrained model");
  out << "prove-forest 1\n";
  out << "features " << num_features_ << "\n";
  out << "classes " << class_names_.size();
  for (const auto& c : class_names_) out << ' ' << c;
  out << "\n";
  out << "params " << params_.num_trees << ' ' << params_.max_depth << ' '
      << params_.features_per_split << ' ' << (params_.bootstrap ? 1 : 0) << ' '
      << params_.min_samples_split << ' ' << params_.min_samples_leaf << "\n";
  out << "seed " << seed_ << "\n";
  for (const auto& tree : trees_) {
    out << "tree " << tree.nodes().size() << "\n";
    for (const auto& node : tree.nodes()) {
      if (node.feature < 0) {
        out << "leaf";
        for (double p : node.distribution) out << ' ' << number(p);
      } else {
        out << "split " << node.feature << ' ' << number(node.threshold) << ' ' << node.left
            << ' ' << node.right;
      }
      out << "\n";
    }
  }
  out << "end\n";
}

std::string RandomForest::to_string() const {
  std::ostringstream out;
  save(out);
  return out.str();
}

RandomForest RandomForest::load(std::istream& in) {
  expect(in, "prove-forest");
  const auto version = parse_int<int>(token(in));
  if (version != 1) {
    fail(ErrorCode::kSchemaError, "model file: unsupported version " + std::to_string(version));
  }
  RandomForest forest;
  expect(in, "features");
  forest.num_features_ = parse_int<std::size_t>(token(in));
  expect(in, "classes");
  const auto k = parse_int<std::size_t>(token(in));
  for (std::size_t i = 0; i < k; ++i) forest.class_names_.push_back(token(in));
  expect(in, "params");
  forest.params_.num_trees = parse_int<int>(token(in));
  forest.params_.max_depth = parse_int<int>(token(in));
  forest.params_.features_per_split = parse_int<int>(token(in));
  forest.params_.bootstrap = parse_int<int>(token(in)) != 0;
  forest.params_.min_samples_split = parse_int<int>(token(in));
  forest.params_.min_samples_leaf = parse_int<int>(token(in));
  expect(in, "seed");
  forest.seed_ = parse_int<std::uint64_t>(token(in));
  for (;;) {
    const std::string head = token(in);
    if (head == "end") break;
    if (head != "tree") fail(ErrorCode::kSchemaError, "model file: expected 'tree' or 'end'");
    const auto count = parse_int<std::size_t>(token(in));
    std::vector<DecisionTree::Node> nodes(count);
    for (auto& node : nodes) {
      const std::string kind = token(in);
      if (kind == "leaf") {
        node.distribution.resize(k);
        for (auto& p : node.distribution) p = parse_double(token(in));
      } else if (kind == "split") {
        node.feature = parse_int<int>(token(in));
        node.threshold = parse_double(token(in));
        node.left = parse_int<int>(token(in));
        node.right = parse_int<int>(token(in));
        const auto limit = static_cast<int>(count);
        if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= forest.num_features_ ||
            node.left <= 0 || node.left >= limit || node.right <= 0 || node.right >= limit) {
          fail(ErrorCode::kSchemaError, "model file: split node out of range");
        }
      } else {
        fail(ErrorCode::kSchemaError, "model file: unknown node kind '" + kind + "'");
      }
    }
    if (nodes.empty()) fail(ErrorCode::kSchemaError, "model file: empty tree");
    forest.trees_.emplace_back(std::move(nodes));
  }
  if (forest.trees_.empty()) fail(ErrorCode::kSchemaError, "model file: no trees");
  return forest;
}

RandomForest RandomForest::from_string(const std::string& text) {
  std::istringstream in(text);
  return load(in);
}

std::vector<int> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed) {
  require(folds >= 2, "cross-validation needs at least two folds");
  require(labels.size() >= static_cast<std::size_t>(folds),
          "cross-validation needs at least one sample per fold");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  SplitMix64 rng(seed);
  std::vector<int> fold_of(labels.size(), -1);
  std::size_t dealt = 0;
  for (auto& [label, members] : by_class) {
    for (std::size_t i = members.size(); i > 1; --i) {
      std::swap(members[i - 1], members[rng.below(i)]);
    }
    for (auto m : members) fold_of[m] = static_cast<int>(dealt++ % static_cast<std::size_t>(folds));
  }
  return fold_of;
}

}  // namespace prove
