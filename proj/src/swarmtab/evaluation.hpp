#pragma once

#include <cstdint>
#include <vector>

namespace swarmtab {

struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t tn = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;

    std::size_t total() const { return tp + tn + fp + fn; }
};

struct MetricsReport {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double auc = 0.0;
    // Zero-denominator metrics report 0 with the matching flag cleared.
    bool precision_defined = true;
    bool recall_defined = true;
    bool f1_defined = true;
    bool auc_defined = true;
    ConfusionCounts counts;
    double threshold = 0.5;
};

// Predict positive iff score >= threshold, then tally.
ConfusionCounts confusion(const std::vector<int>& y_true, const std::vector<double>& scores,
                          double threshold = 0.5);

// Accuracy, precision, recall and F1 from the counts; auc is left for the
// caller. Empty counts are an error.
MetricsReport compute_metrics(const ConfusionCounts& counts);

// Probability that a random positive outranks a random negative, ties counted
// one half (Mann-Whitney). Errors when only one class is present.
double roc_auc(const std::vector<int>& y_true, const std::vector<double>& scores);

// Convenience: F1 at the given threshold, 0 when undefined.
double f1_score(const std::vector<int>& y_true, const std::vector<double>& scores,
                double threshold = 0.5);

struct FoldPlan {
    std::size_t k = 10;
    std::vector<std::size_t> assignment; // fold index per row
    std::uint64_t seed = 0;

    std::vector<std::size_t> train_rows(std::size_t fold) const;
    std::vector<std::size_t> test_rows(std::size_t fold) const;
};

// Stratified: shuffle within each class by seed, then deal through a global
// round-robin cursor so fold sizes differ by at most one. Unstratified mode
// shuffles all rows. Stratification requires every class to have >= k members.
FoldPlan kfold_split(const std::vector<int>& y, std::size_t k, std::uint64_t seed,
                     bool stratified = true);

// Deterministic stratified holdout split: train_fraction of each class goes to
// the training side.
void stratified_holdout(const std::vector<int>& y, double train_fraction, std::uint64_t seed,
                        std::vector<std::size_t>& train_rows, std::vector<std::size_t>& test_rows);

} // namespace swarmtab
