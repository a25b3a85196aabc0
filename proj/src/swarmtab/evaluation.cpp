#include "swarmtab/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "swarmtab/errors.hpp"
#include "swarmtab/rng.hpp"

namespace swarmtab {

ConfusionCounts confusion(const std::vector<int>& y_true, const std::vector<double>& scores,
                          double threshold) {
    if (y_true.size() != scores.size())
        throw std::invalid_argument("confusion: got " + std::to_string(scores.size()) +
                                    " scores for " + std::to_string(y_true.size()) + " labels");
    ConfusionCounts c;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const bool predicted = scores[i] >= threshold;
        if (y_true[i] == 1) {
            if (predicted) ++c.tp;
            else ++c.fn;
        } else {
            if (predicted) ++c.fp;
            else ++c.tn;
        }
    }
    return c;
}

MetricsReport compute_metrics(const ConfusionCounts& counts) {
    if (counts.total() == 0) throw std::invalid_argument("compute_metrics: empty counts");
    MetricsReport r;
    r.counts = counts;
    const double tp = static_cast<double>(counts.tp);
    const double tn = static_cast<double>(counts.tn);
    const double fp = static_cast<double>(counts.fp);
    const double fn = static_cast<double>(counts.fn);

    r.accuracy = (tp + tn) / (tp + fp + fn + tn);

    if (counts.tp + counts.fp > 0) {
        r.precision = tp / (tp + fp);
    } else {
        r.precision_defined = false;
    }
    if (counts.tp + counts.fn > 0) {
        r.recall = tp / (tp + fn);
    } else {
        r.recall_defined = false;
    }
    if (r.precision_defined && r.recall_defined && r.precision + r.recall > 0.0) {
        r.f1 = 2.0 * (r.precision * r.recall) / (r.precision + r.recall);
    } else {
        r.f1_defined = false;
    }
    r.auc_defined = false; // caller fills auc from scores when available
    return r;
}

double roc_auc(const std::vector<int>& y_true, const std::vector<double>& scores) {
    if (y_true.size() != scores.size())
        throw std::invalid_argument("roc_auc: label/score length mismatch");
    std::size_t n_pos = 0;
    for (int v : y_true) n_pos += static_cast<std::size_t>(v);
    const std::size_t n_neg = y_true.size() - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw std::invalid_argument("roc_auc: both classes must be present");

    // Mann-Whitney with midranks for ties.
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (std::size_t t = i; t < j; ++t)
            if (y_true[order[t]] == 1) rank_sum_pos += midrank;
        i = j;
    }
    const double u = rank_sum_pos - static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double f1_score(const std::vector<int>& y_true, const std::vector<double>& scores,
                double threshold) {
    MetricsReport r = compute_metrics(confusion(y_true, scores, threshold));
    return r.f1_defined ? r.f1 : 0.0;
}

std::vector<std::size_t> FoldPlan::train_rows(std::size_t fold) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < assignment.size(); ++i)
        if (assignment[i] != fold) rows.push_back(i);
    return rows;
}

std::vector<std::size_t> FoldPlan::test_rows(std::size_t fold) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < assignment.size(); ++i)
        if (assignment[i] == fold) rows.push_back(i);
    return rows;
}

FoldPlan kfold_split(const std::vector<int>& y, std::size_t k, std::uint64_t seed,
                     bool stratified) {
    const std::size_t n = y.size();
    if (k < 2) throw ConfigError("kfold_split: k must be >= 2");
    if (k > n) throw DataError("kfold_split: k exceeds the row count");

    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.assignment.assign(n, 0);
    Rng rng(seed);

    if (stratified) {
        std::vector<std::size_t> neg, pos;
        for (std::size_t i = 0; i < n; ++i) (y[i] ? pos : neg).push_back(i);
        for (const auto* cls : {&neg, &pos}) {
            if (!cls->empty() && cls->size() < k)
                throw DataError("kfold_split: a class has fewer than k members; "
                                "disable stratification or reduce k");
        }
        std::size_t cursor = 0;
        for (auto* cls : {&neg, &pos}) {
            std::vector<std::size_t> rows = *cls;
            rng.shuffle(rows);
            for (std::size_t i : rows) plan.assignment[i] = cursor++ % k;
        }
    } else {
        std::vector<std::size_t> rows(n);
        std::iota(rows.begin(), rows.end(), 0);
        rng.shuffle(rows);
        for (std::size_t i = 0; i < n; ++i) plan.assignment[rows[i]] = i % k;
    }
    return plan;
}

void stratified_holdout(const std::vector<int>& y, double train_fraction, std::uint64_t seed,
                        std::vector<std::size_t>& train_rows, std::vector<std::size_t>& test_rows) {
    if (!(train_fraction > 0.0) || !(train_fraction < 1.0))
        throw ConfigError("stratified_holdout: train_fraction must be in (0, 1)");
    train_rows.clear();
    test_rows.clear();
    Rng rng(seed);
    std::vector<std::size_t> neg, pos;
    for (std::size_t i = 0; i < y.size(); ++i) (y[i] ? pos : neg).push_back(i);
    for (auto* cls : {&neg, &pos}) {
        std::vector<std::size_t> rows = *cls;
        rng.shuffle(rows);
        std::size_t n_train = static_cast<std::size_t>(
            std::llround(train_fraction * static_cast<double>(rows.size())));
        n_train = std::min(n_train, rows.size());
        if (!rows.empty() && n_train == 0) n_train = 1;
        if (!rows.empty() && n_train == rows.size()) n_train = rows.size() - 1;
        for (std::size_t i = 0; i < rows.size(); ++i)
            (i < n_train ? train_rows : test_rows).push_back(rows[i]);
    }
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(test_rows.begin(), test_rows.end());
}

} // namespace swarmtab
