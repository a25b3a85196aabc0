#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "swarmtab/attention_models.hpp"
#include "swarmtab/classic_models.hpp"
#include "swarmtab/dataset.hpp"
#include "swarmtab/evaluation.hpp"
#include "swarmtab/pca.hpp"
#include "swarmtab/pso.hpp"

namespace swarmtab {

// The feature space the classifiers see. Every column is a float: numerical
// columns carry their scaled values, categorical columns code/(cardinality-1)
// so the integer codes stay recoverable for the embedding models.
struct FeatureBlock {
    Matrix x;
    std::vector<ColumnMeta> meta; // kind, cardinality, name per column

    std::size_t n_rows() const { return x.rows; }
    std::size_t n_features() const { return x.cols; }

    static FeatureBlock from_dataset(const Dataset& ds);

    FeatureBlock gather_rows(const std::vector<std::size_t>& idx) const;
    FeatureBlock select_columns(const std::vector<std::size_t>& cols) const;

    std::vector<std::string> feature_names() const;
    std::vector<std::size_t> categorical_cardinalities() const;
    std::size_t n_numerical() const;

    // Splits into the numerical matrix plus integer codes for the embedding
    // model.
    TabInputs tab_inputs() const;
};

// Copy of `block` with numerical columns min-max rescaled by the training
// rows' statistics (categorical columns untouched). Keeps fold models free of
// normalization leakage.
FeatureBlock refit_normalization(const FeatureBlock& block,
                                 const std::vector<std::size_t>& train_rows);

// ---- front ends -------------------------------------------------------------------

enum class FrontEndKind { none, pca, pso };

struct FrontEndSpec {
    FrontEndKind kind = FrontEndKind::none;
    double pca_retain = 0.95;
    PsoConfig pso;
};

struct FrontEndModel {
    FrontEndKind kind = FrontEndKind::none;
    PcaModel pca;
    FeatureMask mask; // pso
    std::vector<std::string> selected_names;
    std::vector<IterationStat> pso_history;
    double pso_best_cost = 0.0;
};

FrontEndModel fit_front_end(const FrontEndSpec& spec, const FeatureBlock& train,
                            const std::vector<int>& y_train, std::uint64_t seed);
FeatureBlock apply_front_end(const FrontEndModel& model, const FeatureBlock& block);

// ---- classifiers --------------------------------------------------------------------

enum class ClassifierKind { rf, dt, transformer, tabtransformer, logreg };

std::string classifier_kind_name(ClassifierKind kind);
std::string front_end_kind_name(FrontEndKind kind);

struct ClassifierSpec {
    ClassifierKind kind = ClassifierKind::rf;
    ForestConfig rf;
    TreeConfig dt;
    TransformerConfig transformer;       // input dims resolved at fit time
    TabTransformerConfig tabtransformer; // dims/cardinalities resolved at fit time
    LogRegConfig logreg;
    double inner_val_fraction = 0.2; // deep models: carved from training rows
};

struct TransformerModel {
    TransformerConfig config;
    ModelParams params;
};

struct TabTransformerModel {
    TabTransformerConfig config;
    ModelParams params;
};

using TrainedModel =
    std::variant<LogRegModel, DecisionTreeModel, RandomForestModel, TransformerModel,
                 TabTransformerModel>;

struct FitOutcome {
    TrainedModel model;
    TrainingCurves curves; // deep models only
    bool has_curves = false;
};

FitOutcome fit_classifier(const ClassifierSpec& spec, const FeatureBlock& train,
                          const std::vector<int>& y_train, std::uint64_t seed);

std::vector<double> predict_proba(const TrainedModel& model, const FeatureBlock& block);

std::string trained_model_kind(const TrainedModel& model);

// ---- cross validation -----------------------------------------------------------------

struct PipelineSpec {
    FrontEndSpec front_end;
    ClassifierSpec classifier;
    std::size_t k = 10;
    std::uint64_t seed = 0;
    bool stratified = true;
    // fast PSO mode: select once on a dedicated selection split, then
    // cross-validate the classifier on the remaining rows.
    bool fast_pso = false;
    double selection_fraction = 0.25;
    bool refit_norm = true;
};

struct FoldOutcome {
    MetricsReport metrics;
    TrainingCurves curves;
    bool has_curves = false;
    std::size_t pca_k = 0;
    std::vector<std::string> selected_features;
};

struct MetricsSummary {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double auc = 0.0;
};

// Test hook: original-row ids that entered training-side computation per fold.
struct TrainAccessAudit {
    std::vector<std::vector<std::size_t>> train_rows_seen;
};

struct CvResult {
    std::vector<FoldOutcome> folds;
    MetricsSummary mean;
    MetricsSummary stddev; // sample standard deviation over folds
    bool used_fast_pso = false;
    FrontEndModel shared_front_end;   // fast mode only
    std::vector<std::size_t> cv_rows; // row universe after any carve-out
    FoldPlan plan;
};

// Per fold: refit normalization and the front end on the training folds only,
// fit the classifier, evaluate on the held-out fold; aggregate mean/stddev.
CvResult cross_validate(const PipelineSpec& spec, const FeatureBlock& block,
                        const std::vector<int>& y, TrainAccessAudit* audit = nullptr);

} // namespace swarmtab
