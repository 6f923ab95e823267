#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rffp/feature_matrix.hpp"
#include "rffp/kalman.hpp"

namespace rffp {

// Axis-aligned threshold split; feature < 0 marks a leaf. Samples with
// x[feature] <= threshold go left.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::int32_t label = -1;  // class index at leaves
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct ForestParams {
  std::size_t tree_count = 128;
  std::uint64_t seed = 42;
  // Candidate features per node; 0 = ceil(sqrt(feature count)) = 4.
  std::size_t max_features = 0;
  std::size_t min_samples_split = 2;
  std::size_t threads = 0;  // 0 = all cores
};

// Bagged Gini-criterion decision forest. Classes are kept sorted so that all
// tie-breaking (votes, equal gains) resolves to the lexicographically
// smallest candidate, making training and prediction fully deterministic
// given the seed. Each tree draws from an independent RNG stream keyed by
// (seed, tree index), so parallel and serial training produce the same model.
struct ForestModel {
  std::vector<DecisionTree> trees;
  std::vector<std::string> classes;        // sorted lexicographically
  std::vector<std::string> feature_names;  // frozen 15-feature order
  std::uint64_t seed = 0;
  // Reproducibility metadata: FNV-1a digest of each tree's bootstrap indices.
  std::vector<std::uint64_t> bootstrap_digests;
  // Per-tree accumulated impurity decrease per feature (unnormalized).
  std::vector<std::array<double, kScalarFeatureCount>> tree_gains;
};

ForestModel train(const LabeledFeatureMatrix& data, const ForestParams& params = {});

// Majority vote across trees; ties break to the lexicographically smallest
// class. Throws InvalidArgumentError on a feature-count mismatch.
std::string predict(const ForestModel& model, std::span<const double> features);

std::vector<std::string> predict_batch(const ForestModel& model,
                                       const LabeledFeatureMatrix& data,
                                       std::size_t threads = 0);

// Mean decrease in Gini impurity per feature, averaged over trees and
// normalized to sum to 1.
std::array<double, kScalarFeatureCount> feature_importance(const ForestModel& model);

// Versioned JSON serialization; a loaded model reproduces predictions
// bit-identically.
void save_model(const ForestModel& model, const std::filesystem::path& path);
ForestModel load_model(const std::filesystem::path& path);

enum class SmoothingMode { kOff, kOn };
// Whether Kalman smoothing runs once over the whole dataset before folding,
// or separately inside each fold's train/test partition.
enum class SmoothingOrder { kPreSplit, kPostSplit };

struct CrossValidationOptions {
  std::size_t folds = 5;
  ForestParams forest;
  SmoothingMode smoothing = SmoothingMode::kOff;
  SmoothingOrder smoothing_order = SmoothingOrder::kPreSplit;
  KalmanConfig kalman;
};

struct EvalReport {
  double accuracy = 0.0;  // trace(confusion) / sum(confusion)
  std::vector<double> per_fold_accuracies;
  std::vector<std::string> classes;
  std::vector<std::vector<std::size_t>> confusion;  // [actual][predicted]
  std::array<double, kScalarFeatureCount> feature_importances{};
};

// Stratified K-fold cross-validation. Every class must have at least `folds`
// members; importances are the renormalized mean over the fold models.
EvalReport cross_validate(const LabeledFeatureMatrix& data,
                          const CrossValidationOptions& options = {});

struct CorrelationMatrix {
  std::array<std::array<double, kScalarFeatureCount>, kScalarFeatureCount> r{};
  // Constant columns have no defined correlation; their rows/columns are NaN
  // and flagged here instead of silently poisoning the rest of the matrix.
  std::array<bool, kScalarFeatureCount> defined{};
};

CorrelationMatrix pearson_correlation_matrix(const LabeledFeatureMatrix& data);

}  // namespace rffp
