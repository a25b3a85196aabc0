#pragma once

#include <cstdint>
#include <vector>

#include "swarmtab/matrix.hpp"

namespace swarmtab {

// 1 - sum p_i^2 over the two classes. Errors when both counts are zero.
double gini_impurity(std::size_t count_negative, std::size_t count_positive);

// ---- logistic regression (the PSO fitness inner model) -----------------------

struct LogRegConfig {
    double learning_rate = 0.1;
    std::size_t epochs = 300;
    double l2 = 1e-4;
};

struct LogRegModel {
    std::vector<double> weights; // one per active feature
    double bias = 0.0;
    std::vector<std::size_t> trained_feature_indices; // columns of the full matrix
};

// Full-batch gradient descent on regularized BCE, zero-initialized and fully
// deterministic. x is already restricted to the active features;
// feature_indices records which original columns those are (empty = identity).
LogRegModel logreg_fit(const Matrix& x, const std::vector<int>& y, const LogRegConfig& config,
                       std::vector<std::size_t> feature_indices = {});

// sigmoid(x . w + b) per row; x is the full matrix, columns are gathered by
// trained_feature_indices.
std::vector<double> logreg_predict_proba(const LogRegModel& model, const Matrix& x);

// ---- decision tree ------------------------------------------------------------

struct TreeNode {
    bool is_leaf = true;
    // split
    std::size_t feature = 0;
    double threshold = 0.0;
    std::int32_t left = -1;  // index into the node pool
    std::int32_t right = -1;
    // leaf
    double positive_fraction = 0.0;
    // node statistics (all nodes), used for impurity-decrease importances
    double impurity = 0.0;
    std::size_t n_samples = 0;
};

struct TreeConfig {
    std::size_t max_depth = 10;
    std::size_t min_samples_split = 2;
};

struct DecisionTreeModel {
    std::vector<TreeNode> nodes; // preorder; root at index 0
    std::size_t max_depth = 0;
    std::size_t n_features = 0;
};

// Greedy CART-style growth: best Gini-gain split over candidate thresholds at
// midpoints of consecutive sorted distinct values; ties broken by lowest
// feature index, then lowest threshold. A node becomes a leaf at max_depth,
// when pure, when below min_samples_split, or when no candidate threshold
// exists; zero-gain splits are taken (required for parity problems like XOR).
DecisionTreeModel tree_fit(const Matrix& x, const std::vector<int>& y, const TreeConfig& config);

std::vector<double> tree_predict_proba(const DecisionTreeModel& model, const Matrix& x);

// ---- random forest --------------------------------------------------------------

struct ForestConfig {
    std::size_t n_estimators = 200;
    std::size_t max_depth = 10;
    std::size_t min_samples_split = 2;
    // 0 selects ceil(sqrt(n_features)) per split.
    std::size_t feature_subsample = 0;
    bool bootstrap = true;
    std::uint64_t seed = 0;
};

struct RandomForestModel {
    std::vector<DecisionTreeModel> trees;
    std::vector<std::uint64_t> bootstrap_seeds; // per-tree derived seeds
    std::size_t n_features = 0;
    std::size_t feature_subsample = 0;
};

// Each tree trains on a bootstrap resample (n rows with replacement) and
// considers feature_subsample random features per split. Deterministic for a
// fixed seed regardless of worker count.
RandomForestModel forest_fit(const Matrix& x, const std::vector<int>& y,
                             const ForestConfig& config);

// Arithmetic mean of the member trees' probabilities.
std::vector<double> forest_predict_proba(const RandomForestModel& model, const Matrix& x);

// Mean impurity decrease per feature across all splits of all trees,
// normalized to sum to 1 (all zero when no split exists).
std::vector<double> forest_feature_importance(const RandomForestModel& model);

} // namespace swarmtab
