#include "swarmtab/classic_models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "swarmtab/concurrency.hpp"
#include "swarmtab/rng.hpp"

namespace swarmtab {

double gini_impurity(std::size_t count_negative, std::size_t count_positive) {
    const std::size_t n = count_negative + count_positive;
    if (n == 0) throw std::invalid_argument("gini_impurity: empty node");
    const double p0 = static_cast<double>(count_negative) / static_cast<double>(n);
    const double p1 = static_cast<double>(count_positive) / static_cast<double>(n);
    return 1.0 - p0 * p0 - p1 * p1;
}

// ---- logistic regression ---------------------------------------------------------

namespace {

double sigmoid_scalar(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

} // namespace

LogRegModel logreg_fit(const Matrix& x, const std::vector<int>& y, const LogRegConfig& config,
                       std::vector<std::size_t> feature_indices) {
    if (x.cols == 0) throw std::invalid_argument("logreg_fit: no active features");
    if (x.rows == 0 || x.rows != y.size())
        throw std::invalid_argument("logreg_fit: row/target count mismatch");
    bool has0 = false, has1 = false;
    for (int v : y) (v ? has1 : has0) = true;
    if (!has0 || !has1) throw std::invalid_argument("logreg_fit: single-class target");
    if (!feature_indices.empty() && feature_indices.size() != x.cols)
        throw std::invalid_argument("logreg_fit: feature index count does not match matrix width");

    const std::size_t n = x.rows, d = x.cols;
    LogRegModel model;
    model.weights.assign(d, 0.0);
    model.bias = 0.0;
    if (feature_indices.empty()) {
        model.trained_feature_indices.resize(d);
        for (std::size_t j = 0; j < d; ++j) model.trained_feature_indices[j] = j;
    } else {
        model.trained_feature_indices = std::move(feature_indices);
    }

    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<double> grad(d);
    std::vector<double> residual(n);
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = x.row(i);
            double z = model.bias;
            for (std::size_t j = 0; j < d; ++j) z += row[j] * model.weights[j];
            residual[i] = (sigmoid_scalar(z) - static_cast<double>(y[i])) * inv_n;
        }
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_b = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = residual[i];
            const double* row = x.row(i);
            for (std::size_t j = 0; j < d; ++j) grad[j] += r * row[j];
            grad_b += r;
        }
        for (std::size_t j = 0; j < d; ++j)
            model.weights[j] -= config.learning_rate * (grad[j] + 2.0 * config.l2 * model.weights[j]);
        model.bias -= config.learning_rate * grad_b;
    }
    return model;
}

std::vector<double> logreg_predict_proba(const LogRegModel& model, const Matrix& x) {
    for (std::size_t j : model.trained_feature_indices)
        if (j >= x.cols)
            throw std::invalid_argument("logreg_predict_proba: matrix is missing feature column " +
                                        std::to_string(j));
    std::vector<double> out(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* row = x.row(i);
        double z = model.bias;
        for (std::size_t j = 0; j < model.weights.size(); ++j)
            z += model.weights[j] * row[model.trained_feature_indices[j]];
        out[i] = sigmoid_scalar(z);
    }
    return out;
}

// ---- decision tree ------------------------------------------------------------------

namespace {

struct SplitCandidate {
    bool found = false;
    double gain = -1.0;
    std::size_t feature = 0;
    double threshold = 0.0;
};

struct TreeBuilder {
    const Matrix& x;
    const std::vector<int>& y;
    TreeConfig cfg;
    std::size_t feature_subsample; // 0 = all features
    Rng* rng;                      // only used when subsampling
    std::vector<TreeNode> nodes;
    std::vector<std::pair<double, int>> scratch; // (value, label)

    // Best split over the given features; gain ties broken by lowest feature
    // index, then lowest threshold.
    SplitCandidate best_split(const std::vector<std::size_t>& rows,
                              const std::vector<std::size_t>& features, double parent_impurity) {
        SplitCandidate best;
        const std::size_t n = rows.size();
        std::size_t total_pos = 0;
        for (std::size_t i : rows) total_pos += static_cast<std::size_t>(y[i]);

        for (std::size_t f : features) {
            scratch.clear();
            for (std::size_t i : rows) scratch.emplace_back(x.at(i, f), y[i]);
            std::sort(scratch.begin(), scratch.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            std::size_t left_n = 0, left_pos = 0;
            for (std::size_t i = 0; i + 1 < n;) {
                // absorb the whole run of equal values into the left side
                const double value = scratch[i].first;
                while (i < n && scratch[i].first == value) {
                    left_pos += static_cast<std::size_t>(scratch[i].second);
                    ++left_n;
                    ++i;
                }
                if (i >= n) break;
                const double threshold = 0.5 * (value + scratch[i].first);
                const std::size_t right_n = n - left_n;
                const std::size_t right_pos = total_pos - left_pos;
                const double wl = static_cast<double>(left_n) / static_cast<double>(n);
                const double wr = static_cast<double>(right_n) / static_cast<double>(n);
                const double gain = parent_impurity -
                                    wl * gini_impurity(left_n - left_pos, left_pos) -
                                    wr * gini_impurity(right_n - right_pos, right_pos);
                const bool better =
                    !best.found || gain > best.gain ||
                    (gain == best.gain &&
                     (f < best.feature || (f == best.feature && threshold < best.threshold)));
                if (better) {
                    best.found = true;
                    best.gain = gain;
                    best.feature = f;
                    best.threshold = threshold;
                }
            }
        }
        return best;
    }

    std::int32_t build(const std::vector<std::size_t>& rows, std::size_t depth) {
        const std::size_t n = rows.size();
        std::size_t pos = 0;
        for (std::size_t i : rows) pos += static_cast<std::size_t>(y[i]);

        const std::int32_t id = static_cast<std::int32_t>(nodes.size());
        nodes.emplace_back();
        nodes[id].n_samples = n;
        nodes[id].impurity = gini_impurity(n - pos, pos);
        nodes[id].positive_fraction = static_cast<double>(pos) / static_cast<double>(n);

        const bool pure = pos == 0 || pos == n;
        if (pure || depth >= cfg.max_depth || n < cfg.min_samples_split) return id;

        std::vector<std::size_t> features;
        if (feature_subsample == 0 || feature_subsample >= x.cols) {
            features.resize(x.cols);
            for (std::size_t j = 0; j < x.cols; ++j) features[j] = j;
        } else {
            // partial Fisher-Yates draw without replacement
            std::vector<std::size_t> all(x.cols);
            for (std::size_t j = 0; j < x.cols; ++j) all[j] = j;
            for (std::size_t k = 0; k < feature_subsample; ++k) {
                std::size_t j = k + static_cast<std::size_t>(rng->below(x.cols - k));
                std::swap(all[k], all[j]);
            }
            features.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(feature_subsample));
            std::sort(features.begin(), features.end());
        }

        SplitCandidate split = best_split(rows, features, nodes[id].impurity);
        if (!split.found) return id;

        std::vector<std::size_t> left_rows, right_rows;
        left_rows.reserve(n);
        right_rows.reserve(n);
        for (std::size_t i : rows)
            (x.at(i, split.feature) < split.threshold ? left_rows : right_rows).push_back(i);

        // children may reallocate the pool; re-acquire nodes[id] afterwards
        const std::int32_t left_id = build(left_rows, depth + 1);
        const std::int32_t right_id = build(right_rows, depth + 1);
        TreeNode& nd = nodes[static_cast<std::size_t>(id)];
        nd.is_leaf = false;
        nd.feature = split.feature;
        nd.threshold = split.threshold;
        nd.left = left_id;
        nd.right = right_id;
        return id;
    }
};

DecisionTreeModel tree_fit_impl(const Matrix& x, const std::vector<int>& y, const TreeConfig& config,
                                std::size_t feature_subsample, Rng* rng,
                                const std::vector<std::size_t>& rows) {
    if (rows.empty()) throw std::invalid_argument("tree_fit: empty training set");
    TreeBuilder builder{x, y, config, feature_subsample, rng, {}, {}};
    builder.build(rows, 0);
    DecisionTreeModel model;
    model.nodes = std::move(builder.nodes);
    model.max_depth = config.max_depth;
    model.n_features = x.cols;
    return model;
}

} // namespace

DecisionTreeModel tree_fit(const Matrix& x, const std::vector<int>& y, const TreeConfig& config) {
    if (x.rows != y.size()) throw std::invalid_argument("tree_fit: row/target count mismatch");
    std::vector<std::size_t> rows(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) rows[i] = i;
    return tree_fit_impl(x, y, config, 0, nullptr, rows);
}

std::vector<double> tree_predict_proba(const DecisionTreeModel& model, const Matrix& x) {
    if (x.cols != model.n_features)
        throw std::invalid_argument("tree_predict_proba: expected " +
                                    std::to_string(model.n_features) + " features, got " +
                                    std::to_string(x.cols));
    std::vector<double> out(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* row = x.row(i);
        std::size_t node = 0;
        while (!model.nodes[node].is_leaf) {
            const TreeNode& nd = model.nodes[node];
            node = static_cast<std::size_t>(row[nd.feature] < nd.threshold ? nd.left : nd.right);
        }
        out[i] = model.nodes[node].positive_fraction;
    }
    return out;
}

// ---- random forest --------------------------------------------------------------------

RandomForestModel forest_fit(const Matrix& x, const std::vector<int>& y,
                             const ForestConfig& config) {
    if (x.rows == 0 || x.rows != y.size())
        throw std::invalid_argument("forest_fit: row/target count mismatch");
    if (config.n_estimators == 0) throw std::invalid_argument("forest_fit: n_estimators must be >= 1");

    std::size_t subsample = config.feature_subsample;
    if (subsample == 0)
        subsample = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(x.cols))));
    subsample = std::min(subsample, x.cols);

    RandomForestModel model;
    model.trees.resize(config.n_estimators);
    model.bootstrap_seeds.resize(config.n_estimators);
    model.n_features = x.cols;
    model.feature_subsample = subsample;
    for (std::size_t t = 0; t < config.n_estimators; ++t)
        model.bootstrap_seeds[t] = Rng::mix(config.seed, t);

    TreeConfig tree_cfg{config.max_depth, config.min_samples_split};
    const std::size_t n = x.rows;
    parallel_for(config.n_estimators, [&](std::size_t t) {
        Rng rng(model.bootstrap_seeds[t]);
        std::vector<std::size_t> rows(n);
        if (config.bootstrap) {
            for (std::size_t i = 0; i < n; ++i) rows[i] = static_cast<std::size_t>(rng.below(n));
        } else {
            for (std::size_t i = 0; i < n; ++i) rows[i] = i;
        }
        model.trees[t] =
            tree_fit_impl(x, y, tree_cfg, subsample < x.cols ? subsample : 0, &rng, rows);
    });
    return model;
}

std::vector<double> forest_predict_proba(const RandomForestModel& model, const Matrix& x) {
    if (model.trees.empty()) throw std::invalid_argument("forest_predict_proba: empty forest");
    std::vector<double> out(x.rows, 0.0);
    for (const auto& tree : model.trees) {
        std::vector<double> p = tree_predict_proba(tree, x);
        for (std::size_t i = 0; i < x.rows; ++i) out[i] += p[i];
    }
    const double inv = 1.0 / static_cast<double>(model.trees.size());
    for (double& v : out) v *= inv;
    return out;
}

std::vector<double> forest_feature_importance(const RandomForestModel& model) {
    std::vector<double> importance(model.n_features, 0.0);
    for (const auto& tree : model.trees) {
        if (tree.nodes.empty()) continue;
        const double n_root = static_cast<double>(tree.nodes[0].n_samples);
        for (const auto& node : tree.nodes) {
            if (node.is_leaf) continue;
            const TreeNode& l = tree.nodes[static_cast<std::size_t>(node.left)];
            const TreeNode& r = tree.nodes[static_cast<std::size_t>(node.right)];
            const double n = static_cast<double>(node.n_samples);
            const double child = (static_cast<double>(l.n_samples) * l.impurity +
                                  static_cast<double>(r.n_samples) * r.impurity) /
                                 n;
            importance[node.feature] += (n / n_root) * (node.impurity - child);
        }
    }
    double total = 0.0;
    for (double v : importance) total += v;
    if (total > 0.0)
        for (double& v : importance) v /= total;
    return importance;
}

} // namespace swarmtab
