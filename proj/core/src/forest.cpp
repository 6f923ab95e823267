#include "rffp/forest.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>

#include <nlohmann/json.hpp>

#include "rffp/errors.hpp"
#include "rffp/parallel.hpp"
#include "rffp/rng.hpp"

namespace rffp {

namespace {

using json = nlohmann::json;

std::uint64_t fnv1a(const void* data, std::size_t bytes) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::string> sorted_classes(const std::vector<std::string>& labels) {
  std::vector<std::string> classes(labels);
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  return classes;
}

std::vector<std::int32_t> encode_labels(const std::vector<std::string>& labels,
                                        const std::vector<std::string>& classes) {
  std::vector<std::int32_t> y(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto it = std::lower_bound(classes.begin(), classes.end(), labels[i]);
    y[i] = static_cast<std::int32_t>(it - classes.begin());
  }
  return y;
}

struct BestSplit {
  double score = -1.0;  // sum cL^2/nL + sum cR^2/nR, larger is better
  std::int32_t feature = -1;
  double threshold = 0.0;
};

// Builds one tree over a bootstrap sample. Work happens on an index buffer
// partitioned in place; an explicit stack avoids deep recursion on long
// impurity chains.
class TreeBuilder {
 public:
  TreeBuilder(const LabeledFeatureMatrix& data,
              const std::vector<std::int32_t>& y, std::size_t class_count,
              std::size_t max_features, std::size_t min_samples_split)
      : data_(data),
        y_(y),
        class_count_(class_count),
        max_features_(max_features),
        min_samples_split_(min_samples_split),
        counts_(class_count),
        left_counts_(class_count) {}

  DecisionTree build(std::vector<std::size_t>& idx, Rng& rng,
                     std::array<double, kScalarFeatureCount>& gains) {
    tree_.nodes.clear();
    gains.fill(0.0);
    total_weight_ = static_cast<double>(idx.size());

    struct WorkItem {
      std::size_t begin, end;
      std::int32_t parent;  // -1 for the root
      bool is_left;
    };
    std::vector<WorkItem> stack;
    stack.push_back({0, idx.size(), -1, false});

    while (!stack.empty()) {
      WorkItem item = stack.back();
      stack.pop_back();
      const std::int32_t node = build_node(idx, item.begin, item.end, rng,
                                           gains, stack);
      if (item.parent >= 0) {
        TreeNode& parent = tree_.nodes[static_cast<std::size_t>(item.parent)];
        (item.is_left ? parent.left : parent.right) = node;
      }
    }
    return std::move(tree_);
  }

 private:
  template <typename Stack>
  std::int32_t build_node(std::vector<std::size_t>& idx, std::size_t begin,
                          std::size_t end, Rng& rng,
                          std::array<double, kScalarFeatureCount>& gains,
                          Stack& stack) {
    const std::size_t n = end - begin;
    std::fill(counts_.begin(), counts_.end(), std::int64_t{0});
    for (std::size_t i = begin; i < end; ++i) ++counts_[y_[idx[i]]];

    std::int64_t sumsq = 0;
    std::int32_t majority = 0;
    std::int64_t majority_count = -1;
    bool pure = false;
    for (std::size_t c = 0; c < class_count_; ++c) {
      sumsq += counts_[c] * counts_[c];
      if (counts_[c] > majority_count) {
        majority_count = counts_[c];
        majority = static_cast<std::int32_t>(c);
      }
      if (counts_[c] == static_cast<std::int64_t>(n)) pure = true;
    }

    if (pure || n < min_samples_split_) return emit_leaf(majority);

    const double nd = static_cast<double>(n);
    const double node_score = static_cast<double>(sumsq) / nd;

    BestSplit best = find_best_split(idx, begin, end, rng, node_score);
    if (best.feature < 0) return emit_leaf(majority);

    // Weighted impurity decrease, accumulated per feature.
    const double gain = (best.score - node_score) / nd;
    gains[static_cast<std::size_t>(best.feature)] += (nd / total_weight_) * gain;

    auto mid_it = std::partition(
        idx.begin() + static_cast<std::ptrdiff_t>(begin),
        idx.begin() + static_cast<std::ptrdiff_t>(end), [&](std::size_t i) {
          return data_.rows[i][static_cast<std::size_t>(best.feature)] <=
                 best.threshold;
        });
    const std::size_t mid = static_cast<std::size_t>(mid_it - idx.begin());

    const std::int32_t node_index = emit_internal(best);
    // Right pushed first so the left child is processed next (LIFO), keeping
    // node numbering deterministic.
    stack.push_back({mid, end, node_index, false});
    stack.push_back({begin, mid, node_index, true});
    return node_index;
  }

  BestSplit find_best_split(std::vector<std::size_t>& idx, std::size_t begin,
                            std::size_t end, Rng& rng, double node_score) {
    const std::size_t n = end - begin;
    const double nd = static_cast<double>(n);

    // Candidate features without replacement (partial Fisher-Yates), then
    // ascending so equal scores resolve to the smallest feature index.
    std::array<std::size_t, kScalarFeatureCount> features;
    std::iota(features.begin(), features.end(), std::size_t{0});
    for (std::size_t k = 0; k < max_features_; ++k) {
      std::size_t j = k + rng.below(kScalarFeatureCount - k);
      std::swap(features[k], features[j]);
    }
    std::sort(features.begin(), features.begin() + max_features_);

    BestSplit best;
    best.score = node_score + 1e-12;  // require a strictly positive gain

    for (std::size_t k = 0; k < max_features_; ++k) {
      const std::size_t f = features[k];
      std::sort(idx.begin() + static_cast<std::ptrdiff_t>(begin),
                idx.begin() + static_cast<std::ptrdiff_t>(end),
                [&](std::size_t a, std::size_t b) {
                  double va = data_.rows[a][f], vb = data_.rows[b][f];
                  return va < vb || (va == vb && a < b);
                });

      std::fill(left_counts_.begin(), left_counts_.end(), std::int64_t{0});
      std::int64_t sumsq_left = 0;
      std::int64_t sumsq_right = 0;
      for (std::size_t c = 0; c < class_count_; ++c)
        sumsq_right += counts_[c] * counts_[c];

      for (std::size_t i = 0; i + 1 < n; ++i) {
        const std::int32_t c = y_[idx[begin + i]];
        sumsq_left += 2 * left_counts_[c] + 1;
        sumsq_right -= 2 * counts_[c] - 2 * left_counts_[c] - 1;
        ++left_counts_[c];
        // counts_ stays the node total; track right implicitly.
        const double v = data_.rows[idx[begin + i]][f];
        const double next = data_.rows[idx[begin + i + 1]][f];
        if (next <= v) continue;  // split only between distinct values
        const double n_left = static_cast<double>(i + 1);
        const double n_right = nd - n_left;
        const double score = static_cast<double>(sumsq_left) / n_left +
                             static_cast<double>(sumsq_right) / n_right;
        if (score > best.score) {
          best.score = score;
          best.feature = static_cast<std::int32_t>(f);
          best.threshold = v + 0.5 * (next - v);
        }
      }
    }
    return best;
  }

  std::int32_t emit_leaf(std::int32_t label) {
    TreeNode node;
    node.label = label;
    tree_.nodes.push_back(node);
    return static_cast<std::int32_t>(tree_.nodes.size() - 1);
  }

  std::int32_t emit_internal(const BestSplit& best) {
    TreeNode node;
    node.feature = best.feature;
    node.threshold = best.threshold;
    tree_.nodes.push_back(node);
    return static_cast<std::int32_t>(tree_.nodes.size() - 1);
  }

  const LabeledFeatureMatrix& data_;
  const std::vector<std::int32_t>& y_;
  std::size_t class_count_;
  std::size_t max_features_;
  std::size_t min_samples_split_;
  double total_weight_ = 1.0;
  DecisionTree tree_;
  std::vector<std::int64_t> counts_;
  std::vector<std::int64_t> left_counts_;
};

std::int32_t tree_predict(const DecisionTree& tree,
                          std::span<const double> features) {
  std::int32_t at = 0;
  while (true) {
    const TreeNode& node = tree.nodes[static_cast<std::size_t>(at)];
    if (node.feature < 0) return node.label;
    at = features[static_cast<std::size_t>(node.feature)] <= node.threshold
             ? node.left
             : node.right;
  }
}

std::size_t resolved_max_features(const ForestParams& params) {
  if (params.max_features != 0)
    return std::min(params.max_features, kScalarFeatureCount);
  return static_cast<std::size_t>(
      std::ceil(std::sqrt(static_cast<double>(kScalarFeatureCount))));
}

}  // namespace

ForestModel train(const LabeledFeatureMatrix& data, const ForestParams& params) {
  validate(data);
  if (params.tree_count == 0)
    throw InvalidArgumentError("train: tree_count must be > 0");

  ForestModel model;
  model.classes = sorted_classes(data.labels);
  if (model.classes.size() < 2)
    throw DegenerateTrainingError(
        "train: need at least 2 classes, got " +
        std::to_string(model.classes.size()));
  model.feature_names = data.feature_names;
  model.seed = params.seed;

  const std::vector<std::int32_t> y = encode_labels(data.labels, model.classes);
  const std::size_t n = data.size();
  const std::size_t max_features = resolved_max_features(params);

  model.trees.resize(params.tree_count);
  model.bootstrap_digests.resize(params.tree_count);
  model.tree_gains.resize(params.tree_count);

  parallel_for(params.tree_count, params.threads,
               [&](std::size_t begin, std::size_t end) {
    TreeBuilder builder(data, y, model.classes.size(), max_features,
                        params.min_samples_split);
    for (std::size_t t = begin; t < end; ++t) {
      Rng rng = Rng::derive(params.seed, t);
      std::vector<std::size_t> bootstrap(n);
      for (std::size_t i = 0; i < n; ++i) bootstrap[i] = rng.below(n);
      model.bootstrap_digests[t] =
          fnv1a(bootstrap.data(), bootstrap.size() * sizeof(bootstrap[0]));
      model.trees[t] = builder.build(bootstrap, rng, model.tree_gains[t]);
    }
  });
  return model;
}

std::string predict(const ForestModel& model, std::span<const double> features) {
  if (model.trees.empty())
    throw InvalidArgumentError("predict: model has no trees");
  if (features.size() != model.feature_names.size())
    throw InvalidArgumentError(
        "predict: feature count mismatch, model expects " +
        std::to_string(model.feature_names.size()) + ", got " +
        std::to_string(features.size()));

  std::vector<std::size_t> votes(model.classes.size(), 0);
  for (const DecisionTree& tree : model.trees)
    ++votes[static_cast<std::size_t>(tree_predict(tree, features))];

  std::size_t winner = 0;  // ties break to the smallest (lexicographic) class
  for (std::size_t c = 1; c < votes.size(); ++c)
    if (votes[c] > votes[winner]) winner = c;
  return model.classes[winner];
}

std::vector<std::string> predict_batch(const ForestModel& model,
                                       const LabeledFeatureMatrix& data,
                                       std::size_t threads) {
  std::vector<std::string> out(data.size());
  parallel_for(data.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      out[i] = predict(model, data.rows[i]);
  });
  return out;
}

std::array<double, kScalarFeatureCount> feature_importance(
    const ForestModel& model) {
  std::array<double, kScalarFeatureCount> mean{};
  std::size_t counted = 0;
  for (const auto& gains : model.tree_gains) {
    double total = std::accumulate(gains.begin(), gains.end(), 0.0);
    if (total <= 0.0) continue;  // tree never split
    for (std::size_t f = 0; f < kScalarFeatureCount; ++f)
      mean[f] += gains[f] / total;
    ++counted;
  }
  if (counted == 0) {
    mean.fill(1.0 / static_cast<double>(kScalarFeatureCount));
    return mean;
  }
  double total = 0.0;
  for (double v : mean) total += v;
  for (auto& v : mean) v /= total;
  return mean;
}

void save_model(const ForestModel& model, const std::filesystem::path& path) {
  json trees = json::array();
  for (const DecisionTree& tree : model.trees) {
    json nodes = json::array();
    for (const TreeNode& n : tree.nodes)
      nodes.push_back({n.feature, n.threshold, n.left, n.right, n.label});
    trees.push_back(std::move(nodes));
  }
  json gains = json::array();
  for (const auto& g : model.tree_gains)
    gains.push_back(std::vector<double>(g.begin(), g.end()));

  json doc = {
      {"format", "rffp-forest"},
      {"version", 1},
      {"seed", model.seed},
      {"classes", model.classes},
      {"feature_names", model.feature_names},
      {"bootstrap_digests", model.bootstrap_digests},
      {"tree_gains", std::move(gains)},
      {"trees", std::move(trees)},
  };
  std::ofstream out(path);
  if (!out) throw Error("save_model: cannot open " + path.string());
  out << doc.dump() << '\n';
  if (!out) throw Error("save_model: write failed for " + path.string());
}

ForestModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("load_model: cannot open " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error("load_model: " + path.string() + ": " + e.what());
  }
  if (doc.value("format", "") != "rffp-forest" || doc.value("version", 0) != 1)
    throw Error("load_model: " + path.string() +
                " is not a version-1 forest file");

  ForestModel model;
  model.seed = doc.at("seed").get<std::uint64_t>();
  model.classes = doc.at("classes").get<std::vector<std::string>>();
  model.feature_names =
      doc.at("feature_names").get<std::vector<std::string>>();
  model.bootstrap_digests =
      doc.at("bootstrap_digests").get<std::vector<std::uint64_t>>();
  for (const auto& g : doc.at("tree_gains")) {
    std::array<double, kScalarFeatureCount> gains{};
    if (g.size() != kScalarFeatureCount)
      throw Error("load_model: bad tree_gains width");
    for (std::size_t f = 0; f < kScalarFeatureCount; ++f) gains[f] = g[f];
    model.tree_gains.push_back(gains);
  }
  for (const auto& t : doc.at("trees")) {
    DecisionTree tree;
    tree.nodes.reserve(t.size());
    for (const auto& n : t) {
      if (n.size() != 5) throw Error("load_model: bad node arity");
      TreeNode node;
      node.feature = n[0].get<std::int32_t>();
      node.threshold = n[1].get<double>();
      node.left = n[2].get<std::int32_t>();
      node.right = n[3].get<std::int32_t>();
      node.label = n[4].get<std::int32_t>();
      tree.nodes.push_back(node);
    }
    model.trees.push_back(std::move(tree));
  }
  return model;
}

namespace {

// Stratified fold assignment: per class, shuffle that class's rows and deal
// them round-robin, so fold class proportions match the global ones within
// one sample.
std::vector<std::size_t> stratified_folds(const LabeledFeatureMatrix& data,
                                          const std::vector<std::string>& classes,
                                          std::size_t folds,
                                          std::uint64_t seed) {
  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < data.size(); ++i)
    by_class[data.labels[i]].push_back(i);

  for (const auto& [label, rows] : by_class)
    if (rows.size() < folds)
      throw DegenerateTrainingError(
          "cross_validate: class " + label + " has " +
          std::to_string(rows.size()) + " samples, fewer than " +
          std::to_string(folds) + " folds");

  std::vector<std::size_t> fold_of(data.size(), 0);
  std::size_t class_index = 0;
  for (const std::string& label : classes) {
    std::vector<std::size_t>& rows = by_class[label];
    Rng rng = Rng::derive(seed, 0xF01D5ULL, class_index++);
    for (std::size_t i = rows.size(); i > 1; --i)
      std::swap(rows[i - 1], rows[rng.below(i)]);
    for (std::size_t k = 0; k < rows.size(); ++k)
      fold_of[rows[k]] = k % folds;
  }
  return fold_of;
}

LabeledFeatureMatrix select_rows(const LabeledFeatureMatrix& data,
                                 const std::vector<std::size_t>& rows) {
  LabeledFeatureMatrix out = make_feature_matrix(rows.size());
  out.feature_names = data.feature_names;
  for (std::size_t i : rows) {
    out.rows.push_back(data.rows[i]);
    out.labels.push_back(data.labels[i]);
  }
  return out;
}

}  // namespace

EvalReport cross_validate(const LabeledFeatureMatrix& data,
                          const CrossValidationOptions& options) {
  validate(data);
  if (options.folds < 2)
    throw InvalidArgumentError("cross_validate: need at least 2 folds");

  EvalReport report;
  report.classes = sorted_classes(data.labels);
  if (report.classes.size() < 2)
    throw DegenerateTrainingError("cross_validate: need at least 2 classes");

  const std::vector<std::size_t> fold_of =
      stratified_folds(data, report.classes, options.folds, options.forest.seed);

  const LabeledFeatureMatrix* working = &data;
  LabeledFeatureMatrix smoothed;
  if (options.smoothing == SmoothingMode::kOn &&
      options.smoothing_order == SmoothingOrder::kPreSplit) {
    smoothed = smooth_dataset(data, options.kalman);
    working = &smoothed;
  }

  const std::size_t c = report.classes.size();
  report.confusion.assign(c, std::vector<std::size_t>(c, 0));
  std::array<double, kScalarFeatureCount> importance_sum{};

  for (std::size_t fold = 0; fold < options.folds; ++fold) {
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t i = 0; i < working->size(); ++i)
      (fold_of[i] == fold ? test_rows : train_rows).push_back(i);

    LabeledFeatureMatrix train_set = select_rows(*working, train_rows);
    LabeledFeatureMatrix test_set = select_rows(*working, test_rows);
    if (options.smoothing == SmoothingMode::kOn &&
        options.smoothing_order == SmoothingOrder::kPostSplit) {
      train_set = smooth_dataset(train_set, options.kalman);
      test_set = smooth_dataset(test_set, options.kalman);
    }

    ForestParams fold_params = options.forest;
    fold_params.seed = splitmix64(options.forest.seed + fold + 1);
    ForestModel model = train(train_set, fold_params);

    std::vector<std::string> predicted =
        predict_batch(model, test_set, options.forest.threads);

    std::size_t correct = 0;
    for (std::size_t i = 0; i < test_set.size(); ++i) {
      auto actual_it = std::lower_bound(report.classes.begin(),
                                        report.classes.end(),
                                        test_set.labels[i]);
      auto pred_it = std::lower_bound(report.classes.begin(),
                                      report.classes.end(), predicted[i]);
      std::size_t a = static_cast<std::size_t>(actual_it - report.classes.begin());
      std::size_t p = static_cast<std::size_t>(pred_it - report.classes.begin());
      ++report.confusion[a][p];
      if (a == p) ++correct;
    }
    report.per_fold_accuracies.push_back(
        static_cast<double>(correct) / static_cast<double>(test_set.size()));

    auto imp = feature_importance(model);
    for (std::size_t f = 0; f < kScalarFeatureCount; ++f)
      importance_sum[f] += imp[f];
  }

  std::size_t trace = 0, total = 0;
  for (std::size_t a = 0; a < c; ++a)
    for (std::size_t p = 0; p < c; ++p) {
      total += report.confusion[a][p];
      if (a == p) trace += report.confusion[a][p];
    }
  report.accuracy = static_cast<double>(trace) / static_cast<double>(total);

  double imp_total = 0.0;
  for (double v : importance_sum) imp_total += v;
  for (std::size_t f = 0; f < kScalarFeatureCount; ++f)
    report.feature_importances[f] = importance_sum[f] / imp_total;
  return report;
}

CorrelationMatrix pearson_correlation_matrix(const LabeledFeatureMatrix& data) {
  validate(data);
  if (data.size() < 2)
    throw InvalidArgumentError(
        "pearson_correlation_matrix: need at least 2 rows");

  const std::size_t n = data.size();
  const double nd = static_cast<double>(n);

  std::array<double, kScalarFeatureCount> mean{};
  std::array<double, kScalarFeatureCount> sd{};
  CorrelationMatrix out{};

  for (std::size_t f = 0; f < kScalarFeatureCount; ++f) {
    double lo = data.rows[0][f], hi = data.rows[0][f], sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double v = data.rows[i][f];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += v;
    }
    mean[f] = sum / nd;
    out.defined[f] = hi > lo;
    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double d = data.rows[i][f] - mean[f];
      sq += d * d;
    }
    sd[f] = std::sqrt(sq / nd);
  }

  constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < kScalarFeatureCount; ++i) {
    for (std::size_t j = i; j < kScalarFeatureCount; ++j) {
      double r;
      if (!out.defined[i] || !out.defined[j]) {
        r = kNan;
      } else if (i == j) {
        r = 1.0;
      } else {
        double cov = 0.0;
        for (std::size_t k = 0; k < n; ++k)
          cov += (data.rows[k][i] - mean[i]) * (data.rows[k][j] - mean[j]);
        cov /= nd;
        r = std::clamp(cov / (sd[i] * sd[j]), -1.0, 1.0);
      }
      out.r[i][j] = r;
      out.r[j][i] = r;
    }
  }
  return out;
}

}  // namespace rffp
