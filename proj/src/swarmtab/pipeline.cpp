#include "swarmtab/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "swarmtab/errors.hpp"

namespace swarmtab {

FeatureBlock FeatureBlock::from_dataset(const Dataset& ds) {
    FeatureBlock block;
    block.x = ds.unit_scaled();
    block.meta = ds.meta();
    return block;
}

FeatureBlock FeatureBlock::gather_rows(const std::vector<std::size_t>& idx) const {
    FeatureBlock out;
    out.x = x.gather_rows(idx);
    out.meta = meta;
    return out;
}

FeatureBlock FeatureBlock::select_columns(const std::vector<std::size_t>& cols) const {
    FeatureBlock out;
    out.x = x.gather_cols(cols);
    out.meta.reserve(cols.size());
    for (std::size_t c : cols) out.meta.push_back(meta[c]);
    return out;
}

std::vector<std::string> FeatureBlock::feature_names() const {
    std::vector<std::string> names;
    names.reserve(meta.size());
    for (const auto& m : meta) names.push_back(m.name);
    return names;
}

std::vector<std::size_t> FeatureBlock::categorical_cardinalities() const {
    std::vector<std::size_t> cards;
    for (const auto& m : meta)
        if (m.kind == ColumnKind::categorical) cards.push_back(m.cardinality);
    return cards;
}

std::size_t FeatureBlock::n_numerical() const {
    std::size_t n = 0;
    for (const auto& m : meta) n += (m.kind != ColumnKind::categorical);
    return n;
}

TabInputs FeatureBlock::tab_inputs() const {
    TabInputs inputs;
    std::vector<std::size_t> num_cols, cat_cols;
    for (std::size_t j = 0; j < meta.size(); ++j)
        (meta[j].kind == ColumnKind::categorical ? cat_cols : num_cols).push_back(j);

    inputs.numeric = Matrix(x.rows, num_cols.size());
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t j = 0; j < num_cols.size(); ++j)
            inputs.numeric.at(i, j) = x.at(i, num_cols[j]);

    inputs.n_cat = cat_cols.size();
    inputs.codes.resize(x.rows * cat_cols.size());
    for (std::size_t i = 0; i < x.rows; ++i) {
        for (std::size_t j = 0; j < cat_cols.size(); ++j) {
            const std::size_t card = meta[cat_cols[j]].cardinality;
            const double denom = card > 1 ? static_cast<double>(card - 1) : 1.0;
            inputs.codes[i * cat_cols.size() + j] =
                static_cast<std::int32_t>(std::llround(x.at(i, cat_cols[j]) * denom));
        }
    }
    return inputs;
}

FeatureBlock refit_normalization(const FeatureBlock& block,
                                 const std::vector<std::size_t>& train_rows) {
    FeatureBlock out = block;
    if (train_rows.empty()) throw std::invalid_argument("refit_normalization: no training rows");
    for (std::size_t j = 0; j < block.meta.size(); ++j) {
        if (block.meta[j].kind == ColumnKind::categorical) continue;
        double lo = block.x.at(train_rows[0], j), hi = lo;
        for (std::size_t i : train_rows) {
            lo = std::min(lo, block.x.at(i, j));
            hi = std::max(hi, block.x.at(i, j));
        }
        const double range = hi - lo;
        for (std::size_t i = 0; i < out.x.rows; ++i)
            out.x.at(i, j) = range > 0.0 ? (out.x.at(i, j) - lo) / range : 0.0;
        out.meta[j].min = lo;
        out.meta[j].max = hi;
    }
    return out;
}

// ---- front ends ------------------------------------------------------------------------

std::string front_end_kind_name(FrontEndKind kind) {
    switch (kind) {
        case FrontEndKind::none: return "none";
        case FrontEndKind::pca: return "pca";
        case FrontEndKind::pso: return "pso";
    }
    return "?";
}

FrontEndModel fit_front_end(const FrontEndSpec& spec, const FeatureBlock& train,
                            const std::vector<int>& y_train, std::uint64_t seed) {
    FrontEndModel model;
    model.kind = spec.kind;
    switch (spec.kind) {
        case FrontEndKind::none:
            break;
        case FrontEndKind::pca:
            model.pca = pca_fit(train.x, spec.pca_retain);
            break;
        case FrontEndKind::pso: {
            PsoConfig cfg = spec.pso;
            cfg.seed = Rng::mix(seed, cfg.seed);
            PsoResult result = pso_run(train.x, y_train, cfg);
            model.mask = result.best_mask;
            model.pso_history = std::move(result.history);
            model.pso_best_cost = result.best_cost;
            for (std::size_t j : model.mask.selected_indices())
                model.selected_names.push_back(train.meta[j].name);
            break;
        }
    }
    return model;
}

FeatureBlock apply_front_end(const FrontEndModel& model, const FeatureBlock& block) {
    switch (model.kind) {
        case FrontEndKind::none:
            return block;
        case FrontEndKind::pca: {
            FeatureBlock out;
            out.x = pca_transform(model.pca, block.x);
            out.meta.resize(model.pca.k);
            for (std::size_t c = 0; c < model.pca.k; ++c) {
                out.meta[c].name = "pc" + std::to_string(c + 1);
                out.meta[c].kind = ColumnKind::numerical;
            }
            return out;
        }
        case FrontEndKind::pso: {
            const auto idx = model.mask.selected_indices();
            if (idx.empty())
                throw DataError("pso front end selected no features; raise the penalty or rerun");
            return block.select_columns(idx);
        }
    }
    throw std::logic_error("apply_front_end: unreachable");
}

// ---- classifiers ---------------------------------------------------------------------------

std::string classifier_kind_name(ClassifierKind kind) {
    switch (kind) {
        case ClassifierKind::rf: return "rf";
        case ClassifierKind::dt: return "dt";
        case ClassifierKind::transformer: return "transformer";
        case ClassifierKind::tabtransformer: return "tabtransformer";
        case ClassifierKind::logreg: return "logreg";
    }
    return "?";
}

std::string trained_model_kind(const TrainedModel& model) {
    if (std::holds_alternative<LogRegModel>(model)) return "logreg";
    if (std::holds_alternative<DecisionTreeModel>(model)) return "dt";
    if (std::holds_alternative<RandomForestModel>(model)) return "rf";
    if (std::holds_alternative<TransformerModel>(model)) return "transformer";
    return "tabtransformer";
}

namespace {

// Deep models carve an inner validation split from the training rows for
// early stopping; the held-out CV fold stays unseen.
void inner_split(const std::vector<int>& y, double val_fraction, std::uint64_t seed,
                 std::vector<std::size_t>& train_rows, std::vector<std::size_t>& val_rows) {
    stratified_holdout(y, 1.0 - val_fraction, seed, train_rows, val_rows);
}

} // namespace

FitOutcome fit_classifier(const ClassifierSpec& spec, const FeatureBlock& train,
                          const std::vector<int>& y_train, std::uint64_t seed) {
    FitOutcome out;
    switch (spec.kind) {
        case ClassifierKind::logreg: {
            out.model = logreg_fit(train.x, y_train, spec.logreg);
            break;
        }
        case ClassifierKind::dt: {
            out.model = tree_fit(train.x, y_train, spec.dt);
            break;
        }
        case ClassifierKind::rf: {
            ForestConfig cfg = spec.rf;
            cfg.seed = Rng::mix(seed, 0xf03e57);
            out.model = forest_fit(train.x, y_train, cfg);
            break;
        }
        case ClassifierKind::transformer: {
            std::vector<std::size_t> tr, va;
            inner_split(y_train, spec.inner_val_fraction, Rng::mix(seed, 1), tr, va);
            std::vector<int> ytr, yva;
            for (std::size_t i : tr) ytr.push_back(y_train[i]);
            for (std::size_t i : va) yva.push_back(y_train[i]);

            TransformerConfig cfg = spec.transformer;
            cfg.input_dim = train.n_features();
            ModelParams params = init_transformer_params(cfg, Rng::mix(seed, 2));
            Rng rng(Rng::mix(seed, 3));
            TrainResult tr_result = train_transformer(params, cfg, train.x.gather_rows(tr), ytr,
                                                      train.x.gather_rows(va), yva, rng);
            out.curves = std::move(tr_result.curves);
            out.has_curves = true;
            out.model = TransformerModel{cfg, std::move(params)};
            break;
        }
        case ClassifierKind::tabtransformer: {
            std::vector<std::size_t> tr, va;
            inner_split(y_train, spec.inner_val_fraction, Rng::mix(seed, 1), tr, va);
            std::vector<int> ytr, yva;
            for (std::size_t i : tr) ytr.push_back(y_train[i]);
            for (std::size_t i : va) yva.push_back(y_train[i]);

            TabTransformerConfig cfg = spec.tabtransformer;
            cfg.n_numerical = train.n_numerical();
            cfg.categorical_cardinalities = train.categorical_cardinalities();
            ModelParams params = init_tabtransformer_params(cfg, Rng::mix(seed, 2));
            Rng rng(Rng::mix(seed, 3));
            const TabInputs all = train.tab_inputs();
            TrainResult tr_result = train_tabtransformer(params, cfg, all.gather_rows(tr), ytr,
                                                         all.gather_rows(va), yva, rng);
            out.curves = std::move(tr_result.curves);
            out.has_curves = true;
            out.model = TabTransformerModel{cfg, std::move(params)};
            break;
        }
    }
    return out;
}

std::vector<double> predict_proba(const TrainedModel& model, const FeatureBlock& block) {
    if (const auto* m = std::get_if<LogRegModel>(&model))
        return logreg_predict_proba(*m, block.x);
    if (const auto* m = std::get_if<DecisionTreeModel>(&model))
        return tree_predict_proba(*m, block.x);
    if (const auto* m = std::get_if<RandomForestModel>(&model))
        return forest_predict_proba(*m, block.x);
    if (const auto* m = std::get_if<TransformerModel>(&model))
        return transformer_forward(m->params, m->config, block.x);
    const auto& m = std::get<TabTransformerModel>(model);
    return tabtransformer_forward(m.params, m.config, block.tab_inputs());
}

// ---- cross validation -------------------------------------------------------------------------

namespace {

MetricsSummary fold_summary(const MetricsReport& r) {
    return MetricsSummary{r.accuracy, r.precision, r.recall, r.f1, r.auc};
}

} // namespace

CvResult cross_validate(const PipelineSpec& spec, const FeatureBlock& block,
                        const std::vector<int>& y, TrainAccessAudit* audit) {
    if (block.n_rows() != y.size())
        throw std::invalid_argument("cross_validate: row/target count mismatch");

    CvResult result;

    // Row universe; fast PSO mode reserves a dedicated selection split first.
    std::vector<std::size_t> rows(block.n_rows());
    std::iota(rows.begin(), rows.end(), 0);
    if (spec.front_end.kind == FrontEndKind::pso && spec.fast_pso) {
        std::vector<std::size_t> selection_rows, cv_rows;
        stratified_holdout(y, spec.selection_fraction, Rng::mix(spec.seed, 0xfa57), selection_rows,
                           cv_rows);
        std::vector<int> y_sel;
        for (std::size_t i : selection_rows) y_sel.push_back(y[i]);
        result.shared_front_end = fit_front_end(spec.front_end, block.gather_rows(selection_rows),
                                                y_sel, Rng::mix(spec.seed, 0x5e1));
        result.used_fast_pso = true;
        rows = std::move(cv_rows);
    }
    result.cv_rows = rows;

    const FeatureBlock cv_block = block.gather_rows(rows);
    std::vector<int> cv_y;
    cv_y.reserve(rows.size());
    for (std::size_t i : rows) cv_y.push_back(y[i]);

    result.plan = kfold_split(cv_y, spec.k, Rng::mix(spec.seed, 0xf01d), spec.stratified);
    if (audit) audit->train_rows_seen.assign(spec.k, {});

    std::vector<MetricsSummary> fold_values;
    for (std::size_t fold = 0; fold < spec.k; ++fold) {
        const std::vector<std::size_t> train_idx = result.plan.train_rows(fold);
        const std::vector<std::size_t> test_idx = result.plan.test_rows(fold);
        if (audit)
            for (std::size_t i : train_idx) audit->train_rows_seen[fold].push_back(rows[i]);

        const FeatureBlock fold_block =
            spec.refit_norm ? refit_normalization(cv_block, train_idx) : cv_block;

        std::vector<int> y_train, y_test;
        for (std::size_t i : train_idx) y_train.push_back(cv_y[i]);
        for (std::size_t i : test_idx) y_test.push_back(cv_y[i]);

        const FeatureBlock train_block = fold_block.gather_rows(train_idx);
        const FeatureBlock test_block = fold_block.gather_rows(test_idx);

        FrontEndModel front = result.used_fast_pso
                                  ? result.shared_front_end
                                  : fit_front_end(spec.front_end, train_block, y_train,
                                                  Rng::mix(spec.seed, 0x100 + fold));
        const FeatureBlock train_features = apply_front_end(front, train_block);
        const FeatureBlock test_features = apply_front_end(front, test_block);

        FitOutcome fitted = fit_classifier(spec.classifier, train_features, y_train,
                                           Rng::mix(spec.seed, 0x200 + fold));
        const std::vector<double> scores = predict_proba(fitted.model, test_features);

        FoldOutcome outcome;
        outcome.metrics = compute_metrics(confusion(y_test, scores));
        bool has0 = false, has1 = false;
        for (int v : y_test) (v ? has1 : has0) = true;
        if (has0 && has1) {
            outcome.metrics.auc = roc_auc(y_test, scores);
            outcome.metrics.auc_defined = true;
        }
        outcome.curves = std::move(fitted.curves);
        outcome.has_curves = fitted.has_curves;
        if (front.kind == FrontEndKind::pca) outcome.pca_k = front.pca.k;
        if (front.kind == FrontEndKind::pso) outcome.selected_features = front.selected_names;

        fold_values.push_back(fold_summary(outcome.metrics));
        result.folds.push_back(std::move(outcome));
    }

    // mean and sample stddev over folds
    const double n = static_cast<double>(fold_values.size());
    auto accumulate = [&](auto member) {
        double mean = 0.0;
        for (const auto& v : fold_values) mean += v.*member;
        mean /= n;
        double var = 0.0;
        for (const auto& v : fold_values) {
            const double d = v.*member - mean;
            var += d * d;
        }
        const double sd = fold_values.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
        return std::pair<double, double>(mean, sd);
    };
    std::tie(result.mean.accuracy, result.stddev.accuracy) = accumulate(&MetricsSummary::accuracy);
    std::tie(result.mean.precision, result.stddev.precision) =
        accumulate(&MetricsSummary::precision);
    std::tie(result.mean.recall, result.stddev.recall) = accumulate(&MetricsSummary::recall);
    std::tie(result.mean.f1, result.stddev.f1) = accumulate(&MetricsSummary::f1);
    std::tie(result.mean.auc, result.stddev.auc) = accumulate(&MetricsSummary::auc);
    return result;
}

} // namespace swarmtab
