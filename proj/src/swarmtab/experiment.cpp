#include "swarmtab/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "swarmtab/errors.hpp"

namespace swarmtab {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError("config: " + (path.empty() ? msg : path + ": " + msg));
}

std::string join_path(const std::string& path, const char* key) {
    return path.empty() ? key : path + "." + key;
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) fail(path, "expected an object");
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) { ok = true; break; }
        if (!ok) fail(path, "unknown key '" + key + "'");
    }
}

double get_num(const json& obj, const std::string& path, const char* key, double def) {
    if (!obj.contains(key)) return def;
    if (!obj.at(key).is_number()) fail(join_path(path, key), "expected a number");
    return obj.at(key).get<double>();
}

std::size_t get_count(const json& obj, const std::string& path, const char* key, std::size_t def) {
    if (!obj.contains(key)) return def;
    const json& v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0)
        fail(join_path(path, key), "expected a non-negative integer");
    return v.get<std::size_t>();
}

std::uint64_t get_seed(const json& obj, const std::string& path, const char* key,
                       std::uint64_t def) {
    if (!obj.contains(key)) return def;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) fail(join_path(path, key), "expected an integer seed");
    return v.get<std::uint64_t>();
}

bool get_bool(const json& obj, const std::string& path, const char* key, bool def) {
    if (!obj.contains(key)) return def;
    if (!obj.at(key).is_boolean()) fail(join_path(path, key), "expected a boolean");
    return obj.at(key).get<bool>();
}

std::string get_str(const json& obj, const std::string& path, const char* key,
                    const std::string& def) {
    if (!obj.contains(key)) return def;
    if (!obj.at(key).is_string()) fail(join_path(path, key), "expected a string");
    return obj.at(key).get<std::string>();
}

std::vector<std::string> get_str_list(const json& obj, const std::string& path, const char* key) {
    std::vector<std::string> out;
    if (!obj.contains(key)) return out;
    if (!obj.at(key).is_array()) fail(join_path(path, key), "expected an array of strings");
    for (const auto& v : obj.at(key)) {
        if (!v.is_string()) fail(join_path(path, key), "expected an array of strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

DataSourceConfig parse_data(const json& j) {
    DataSourceConfig data;
    check_keys(j, "data",
               {"type", "path", "target_column", "positive_label", "min_non_null", "criteria",
                "n_rows", "n_numerical", "n_categorical", "n_informative", "informative_indices",
                "noise_level", "seed", "categorical_cardinality"});
    const std::string type = get_str(j, "data", "type", "");
    if (type == "synth") {
        data.is_synth = true;
        data.synth.n_rows = get_count(j, "data", "n_rows", 2000);
        data.synth.n_numerical = get_count(j, "data", "n_numerical", 40);
        data.synth.n_categorical = get_count(j, "data", "n_categorical", 10);
        data.synth.n_informative = get_count(j, "data", "n_informative", 8);
        data.synth.noise_level = get_num(j, "data", "noise_level", 0.1);
        data.synth.seed = get_seed(j, "data", "seed", 7);
        data.synth.categorical_cardinality = get_count(j, "data", "categorical_cardinality", 5);
        if (j.contains("informative_indices")) {
            if (!j.at("informative_indices").is_array())
                fail("data.informative_indices", "expected an array of column indices");
            data.synth.informative_indices =
                j.at("informative_indices").get<std::vector<std::size_t>>();
        }
    } else if (type == "csv") {
        data.is_synth = false;
        data.path = get_str(j, "data", "path", "");
        if (data.path.empty()) fail("data.path", "required for csv data");
        data.target_column = get_str(j, "data", "target_column", "");
        data.positive_label = get_str(j, "data", "positive_label", "");
        data.min_non_null = get_num(j, "data", "min_non_null", 0.01);
        if (j.contains("criteria")) {
            const json& c = j.at("criteria");
            if (c.is_string()) {
                const std::string preset = c.get<std::string>();
                if (preset == "hfea") data.use_hfea_criteria = true;
                else if (preset != "none")
                    fail("data.criteria", "unknown preset '" + preset + "' (use \"hfea\", \"none\" "
                                          "or an object)");
            } else {
                check_keys(c, "data.criteria",
                           {"target_column", "required_any_of", "non_negative_columns",
                            "required_columns"});
                SelectionCriteria crit;
                crit.target_column = get_str(c, "data.criteria", "target_column", "");
                crit.required_any_of = get_str_list(c, "data.criteria", "required_any_of");
                crit.non_negative_columns =
                    get_str_list(c, "data.criteria", "non_negative_columns");
                crit.required_columns = get_str_list(c, "data.criteria", "required_columns");
                data.criteria = std::move(crit);
            }
        }
        if (data.target_column.empty()) {
            if (data.use_hfea_criteria) data.target_column = hfea_selection_criteria().target_column;
            else if (data.criteria) data.target_column = data.criteria->target_column;
            else fail("data.target_column", "required for csv data without criteria");
        }
        if (data.criteria && data.criteria->target_column.empty())
            data.criteria->target_column = data.target_column;
    } else {
        fail("data.type", "expected \"csv\" or \"synth\"");
    }
    return data;
}

FrontEndSpec parse_front_end(const json& j) {
    FrontEndSpec spec;
    check_keys(j, "front_end", {"kind", "retain", "pso"});
    const std::string kind = get_str(j, "front_end", "kind", "none");
    if (kind == "none") spec.kind = FrontEndKind::none;
    else if (kind == "pca") spec.kind = FrontEndKind::pca;
    else if (kind == "pso") spec.kind = FrontEndKind::pso;
    else fail("front_end.kind", "expected \"none\", \"pca\" or \"pso\"");

    spec.pca_retain = get_num(j, "front_end", "retain", 0.95);
    if (j.contains("pso")) {
        const json& p = j.at("pso");
        check_keys(p, "front_end.pso",
                   {"swarm_size", "max_iterations", "inertia", "cognitive", "social", "penalty",
                    "velocity_clamp", "fitness_split", "seed", "inner"});
        spec.pso.swarm_size = get_count(p, "front_end.pso", "swarm_size", 20);
        spec.pso.max_iterations = get_count(p, "front_end.pso", "max_iterations", 1000);
        spec.pso.inertia = get_num(p, "front_end.pso", "inertia", 0.7);
        spec.pso.cognitive = get_num(p, "front_end.pso", "cognitive", 1.5);
        spec.pso.social = get_num(p, "front_end.pso", "social", 2.0);
        spec.pso.penalty = get_num(p, "front_end.pso", "penalty", 0.005);
        spec.pso.velocity_clamp = get_num(p, "front_end.pso", "velocity_clamp", 4.0);
        spec.pso.fitness_split = get_num(p, "front_end.pso", "fitness_split", 0.8);
        spec.pso.seed = get_seed(p, "front_end.pso", "seed", 0);
        if (p.contains("inner")) {
            const json& inner = p.at("inner");
            check_keys(inner, "front_end.pso.inner", {"learning_rate", "epochs", "l2"});
            spec.pso.inner.learning_rate =
                get_num(inner, "front_end.pso.inner", "learning_rate", 0.1);
            spec.pso.inner.epochs = get_count(inner, "front_end.pso.inner", "epochs", 300);
            spec.pso.inner.l2 = get_num(inner, "front_end.pso.inner", "l2", 1e-4);
        }
    }
    return spec;
}

ClassifierSpec parse_classifier(const json& j) {
    ClassifierSpec spec;
    check_keys(j, "classifier",
               {"kind", "rf", "dt", "transformer", "tabtransformer", "inner_val_fraction"});
    const std::string kind = get_str(j, "classifier", "kind", "");
    if (kind == "rf") spec.kind = ClassifierKind::rf;
    else if (kind == "dt") spec.kind = ClassifierKind::dt;
    else if (kind == "transformer") spec.kind = ClassifierKind::transformer;
    else if (kind == "tabtransformer") spec.kind = ClassifierKind::tabtransformer;
    else fail("classifier.kind", "expected \"rf\", \"dt\", \"transformer\" or \"tabtransformer\"");

    spec.inner_val_fraction = get_num(j, "classifier", "inner_val_fraction", 0.2);

    if (j.contains("rf")) {
        const json& c = j.at("rf");
        check_keys(c, "classifier.rf",
                   {"n_estimators", "max_depth", "min_samples_split", "feature_subsample",
                    "bootstrap"});
        spec.rf.n_estimators = get_count(c, "classifier.rf", "n_estimators", 200);
        spec.rf.max_depth = get_count(c, "classifier.rf", "max_depth", 10);
        spec.rf.min_samples_split = get_count(c, "classifier.rf", "min_samples_split", 2);
        spec.rf.feature_subsample = get_count(c, "classifier.rf", "feature_subsample", 0);
        spec.rf.bootstrap = get_bool(c, "classifier.rf", "bootstrap", true);
    }
    if (j.contains("dt")) {
        const json& c = j.at("dt");
        check_keys(c, "classifier.dt", {"max_depth", "min_samples_split"});
        spec.dt.max_depth = get_count(c, "classifier.dt", "max_depth", 10);
        spec.dt.min_samples_split = get_count(c, "classifier.dt", "min_samples_split", 2);
    }
    if (j.contains("transformer")) {
        const json& c = j.at("transformer");
        check_keys(c, "classifier.transformer",
                   {"model_dim", "num_heads", "ff_dim", "num_layers", "dropout_rate", "l2_reg",
                    "batch_size", "learning_rate", "epochs", "early_stop_patience"});
        spec.transformer.model_dim = get_count(c, "classifier.transformer", "model_dim", 128);
        spec.transformer.num_heads = get_count(c, "classifier.transformer", "num_heads", 4);
        spec.transformer.ff_dim = get_count(c, "classifier.transformer", "ff_dim", 128);
        spec.transformer.num_layers = get_count(c, "classifier.transformer", "num_layers", 2);
        spec.transformer.dropout_rate =
            get_num(c, "classifier.transformer", "dropout_rate", 0.3);
        spec.transformer.l2_reg = get_num(c, "classifier.transformer", "l2_reg", 1e-4);
        spec.transformer.batch_size = get_count(c, "classifier.transformer", "batch_size", 2048);
        spec.transformer.learning_rate =
            get_num(c, "classifier.transformer", "learning_rate", 1e-6);
        spec.transformer.epochs = get_count(c, "classifier.transformer", "epochs", 40);
        spec.transformer.early_stop_patience =
            get_count(c, "classifier.transformer", "early_stop_patience", 2);
    }
    if (j.contains("tabtransformer")) {
        const json& c = j.at("tabtransformer");
        check_keys(c, "classifier.tabtransformer",
                   {"embedding_dim", "num_heads", "ff_dim", "num_layers", "dropout_rate", "l2_reg",
                    "batch_size", "learning_rate", "epochs", "early_stop_patience"});
        spec.tabtransformer.embedding_dim =
            get_count(c, "classifier.tabtransformer", "embedding_dim", 8);
        spec.tabtransformer.num_heads = get_count(c, "classifier.tabtransformer", "num_heads", 4);
        spec.tabtransformer.ff_dim = get_count(c, "classifier.tabtransformer", "ff_dim", 128);
        spec.tabtransformer.num_layers =
            get_count(c, "classifier.tabtransformer", "num_layers", 1);
        spec.tabtransformer.dropout_rate =
            get_num(c, "classifier.tabtransformer", "dropout_rate", 0.2);
        spec.tabtransformer.l2_reg = get_num(c, "classifier.tabtransformer", "l2_reg", 0.01);
        spec.tabtransformer.batch_size =
            get_count(c, "classifier.tabtransformer", "batch_size", 512);
        spec.tabtransformer.learning_rate =
            get_num(c, "classifier.tabtransformer", "learning_rate", 1e-7);
        spec.tabtransformer.epochs = get_count(c, "classifier.tabtransformer", "epochs", 40);
        spec.tabtransformer.early_stop_patience =
            get_count(c, "classifier.tabtransformer", "early_stop_patience", 2);
    }
    return spec;
}

} // namespace

ExperimentConfig parse_config_json(const json& j) {
    ExperimentConfig config;
    check_keys(j, "", {"name", "data", "front_end", "classifier", "evaluation", "output_dir"});
    config.name = get_str(j, "", "name", "experiment");
    config.output_dir = get_str(j, "", "output_dir", "out");

    if (!j.contains("data")) fail("data", "required");
    config.data = parse_data(j.at("data"));

    if (j.contains("front_end")) config.pipeline.front_end = parse_front_end(j.at("front_end"));
    if (!j.contains("classifier")) fail("classifier", "required");
    config.pipeline.classifier = parse_classifier(j.at("classifier"));

    if (j.contains("evaluation")) {
        const json& e = j.at("evaluation");
        check_keys(e, "evaluation",
                   {"k", "seed", "stratified", "fast_pso_mode", "selection_fraction",
                    "refit_normalization"});
        config.pipeline.k = get_count(e, "evaluation", "k", 10);
        config.pipeline.seed = get_seed(e, "evaluation", "seed", 42);
        config.pipeline.stratified = get_bool(e, "evaluation", "stratified", true);
        config.pipeline.fast_pso = get_bool(e, "evaluation", "fast_pso_mode", false);
        config.pipeline.selection_fraction =
            get_num(e, "evaluation", "selection_fraction", 0.25);
        config.pipeline.refit_norm = get_bool(e, "evaluation", "refit_normalization", true);
    } else {
        config.pipeline.k = 10;
        config.pipeline.seed = 42;
    }
    return config;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config: " + path + " is not valid JSON: " + e.what());
    }
    return parse_config_json(j);
}

json config_echo(const ExperimentConfig& config) {
    json j;
    j["name"] = config.name;
    j["output_dir"] = config.output_dir;

    json data;
    if (config.data.is_synth) {
        data["type"] = "synth";
        data["n_rows"] = config.data.synth.n_rows;
        data["n_numerical"] = config.data.synth.n_numerical;
        data["n_categorical"] = config.data.synth.n_categorical;
        data["n_informative"] = config.data.synth.n_informative;
        if (!config.data.synth.informative_indices.empty())
            data["informative_indices"] = config.data.synth.informative_indices;
        data["noise_level"] = config.data.synth.noise_level;
        data["seed"] = config.data.synth.seed;
        data["categorical_cardinality"] = config.data.synth.categorical_cardinality;
    } else {
        data["type"] = "csv";
        data["path"] = config.data.path;
        data["target_column"] = config.data.target_column;
        if (!config.data.positive_label.empty())
            data["positive_label"] = config.data.positive_label;
        data["min_non_null"] = config.data.min_non_null;
        if (config.data.use_hfea_criteria) {
            data["criteria"] = "hfea";
        } else if (config.data.criteria) {
            json c;
            c["target_column"] = config.data.criteria->target_column;
            c["required_any_of"] = config.data.criteria->required_any_of;
            c["non_negative_columns"] = config.data.criteria->non_negative_columns;
            c["required_columns"] = config.data.criteria->required_columns;
            data["criteria"] = c;
        } else {
            data["criteria"] = "none";
        }
    }
    j["data"] = data;

    json fe;
    fe["kind"] = front_end_kind_name(config.pipeline.front_end.kind);
    fe["retain"] = config.pipeline.front_end.pca_retain;
    {
        const PsoConfig& p = config.pipeline.front_end.pso;
        fe["pso"] = json{{"swarm_size", p.swarm_size},
                         {"max_iterations", p.max_iterations},
                         {"inertia", p.inertia},
                         {"cognitive", p.cognitive},
                         {"social", p.social},
                         {"penalty", p.penalty},
                         {"velocity_clamp", p.velocity_clamp},
                         {"fitness_split", p.fitness_split},
                         {"seed", p.seed},
                         {"inner", json{{"learning_rate", p.inner.learning_rate},
                                        {"epochs", p.inner.epochs},
                                        {"l2", p.inner.l2}}}};
    }
    j["front_end"] = fe;

    json cl;
    cl["kind"] = classifier_kind_name(config.pipeline.classifier.kind);
    cl["inner_val_fraction"] = config.pipeline.classifier.inner_val_fraction;
    {
        const ForestConfig& c = config.pipeline.classifier.rf;
        cl["rf"] = json{{"n_estimators", c.n_estimators},
                        {"max_depth", c.max_depth},
                        {"min_samples_split", c.min_samples_split},
                        {"feature_subsample", c.feature_subsample},
                        {"bootstrap", c.bootstrap}};
    }
    {
        const TreeConfig& c = config.pipeline.classifier.dt;
        cl["dt"] = json{{"max_depth", c.max_depth}, {"min_samples_split", c.min_samples_split}};
    }
    {
        const TransformerConfig& c = config.pipeline.classifier.transformer;
        cl["transformer"] = json{{"model_dim", c.model_dim},
                                 {"num_heads", c.num_heads},
                                 {"ff_dim", c.ff_dim},
                                 {"num_layers", c.num_layers},
                                 {"dropout_rate", c.dropout_rate},
                                 {"l2_reg", c.l2_reg},
                                 {"batch_size", c.batch_size},
                                 {"learning_rate", c.learning_rate},
                                 {"epochs", c.epochs},
                                 {"early_stop_patience", c.early_stop_patience}};
    }
    {
        const TabTransformerConfig& c = config.pipeline.classifier.tabtransformer;
        cl["tabtransformer"] = json{{"embedding_dim", c.embedding_dim},
                                    {"num_heads", c.num_heads},
                                    {"ff_dim", c.ff_dim},
                                    {"num_layers", c.num_layers},
                                    {"dropout_rate", c.dropout_rate},
                                    {"l2_reg", c.l2_reg},
                                    {"batch_size", c.batch_size},
                                    {"learning_rate", c.learning_rate},
                                    {"epochs", c.epochs},
                                    {"early_stop_patience", c.early_stop_patience}};
    }
    j["classifier"] = cl;

    j["evaluation"] = json{{"k", config.pipeline.k},
                           {"seed", config.pipeline.seed},
                           {"stratified", config.pipeline.stratified},
                           {"fast_pso_mode", config.pipeline.fast_pso},
                           {"selection_fraction", config.pipeline.selection_fraction},
                           {"refit_normalization", config.pipeline.refit_norm}};
    return j;
}

// ---- running ---------------------------------------------------------------------------

std::pair<Dataset, PreprocessAudit> resolve_dataset(const DataSourceConfig& data) {
    if (data.is_synth) {
        SynthResult synth = generate_synthetic(data.synth);
        PreprocessAudit audit;
        audit.rows_in = synth.dataset.n_rows();
        audit.rows_out = synth.dataset.n_rows();
        return {std::move(synth.dataset), audit};
    }

    RawTable table = standardize_columns(load_csv(data.path));
    PreprocessAudit audit;
    audit.rows_in = table.n_rows();

    const std::size_t cols_before = table.n_cols();
    std::vector<std::string> names_before;
    for (const auto& c : table.columns) names_before.push_back(c.name);
    table = drop_sparse_columns(std::move(table), data.min_non_null);
    if (table.n_cols() != cols_before) {
        std::vector<std::string> kept;
        for (const auto& c : table.columns) kept.push_back(c.name);
        for (const auto& name : names_before)
            if (std::find(kept.begin(), kept.end(), name) == kept.end())
                audit.columns_dropped.push_back(name);
    }

    SelectionCriteria criteria;
    bool have_criteria = false;
    if (data.use_hfea_criteria) {
        criteria = hfea_selection_criteria();
        have_criteria = true;
    } else if (data.criteria) {
        criteria = *data.criteria;
        have_criteria = true;
    }
    if (have_criteria) {
        auto [filtered, selection_audit] = apply_selection_criteria(std::move(table), criteria);
        table = std::move(filtered);
        audit.rows_out = selection_audit.rows_out;
    } else {
        audit.rows_out = table.n_rows();
    }

    table = impute_missing(std::move(table));
    EncodeOptions opts;
    opts.target_column = data.target_column;
    opts.positive_label = data.positive_label;
    Dataset ds = encode_and_normalize(table, opts);
    return {std::move(ds), audit};
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
    ExperimentReport report;
    report.config = config;
    report.method = front_end_kind_name(config.pipeline.front_end.kind) + "+" +
                    classifier_kind_name(config.pipeline.classifier.kind);

    const auto t_start = std::chrono::steady_clock::now();
    auto [dataset, audit] = resolve_dataset(config.data);
    report.audit = audit;
    const FeatureBlock block = FeatureBlock::from_dataset(dataset);
    report.timings_s["dataset"] = seconds_since(t_start);

    const auto t_cv = std::chrono::steady_clock::now();
    report.cv = cross_validate(config.pipeline, block, dataset.y());
    report.timings_s["cross_validation"] = seconds_since(t_cv);

    // Final deliverable: refit on every row (fast PSO mode reuses the mask
    // found on the dedicated selection split).
    const auto t_fit = std::chrono::steady_clock::now();
    FrontEndModel front =
        report.cv.used_fast_pso
            ? report.cv.shared_front_end
            : fit_front_end(config.pipeline.front_end, block, dataset.y(),
                            Rng::mix(config.pipeline.seed, 0xf17a11));
    const FeatureBlock features = apply_front_end(front, block);
    FitOutcome fitted = fit_classifier(config.pipeline.classifier, features, dataset.y(),
                                       Rng::mix(config.pipeline.seed, 0xf17f17));
    report.final_model = PipelineModel{std::move(front), std::move(fitted.model), block.meta};
    report.timings_s["final_fit"] = seconds_since(t_fit);
    report.timings_s["total"] = seconds_since(t_start);
    return report;
}

json report_json(const ExperimentReport& report, bool include_timings) {
    json j;
    j["config"] = config_echo(report.config);
    j["method"] = report.method;
    j["seed"] = report.config.pipeline.seed;
    j["audit"] = json{{"rows_in", report.audit.rows_in},
                      {"rows_out", report.audit.rows_out},
                      {"columns_dropped", report.audit.columns_dropped}};

    json folds = json::array();
    for (const auto& fold : report.cv.folds) {
        json f;
        f["accuracy"] = fold.metrics.accuracy;
        f["precision"] = fold.metrics.precision;
        f["recall"] = fold.metrics.recall;
        f["f1"] = fold.metrics.f1;
        f["auc"] = fold.metrics.auc;
        f["counts"] = json{{"tp", fold.metrics.counts.tp},
                           {"tn", fold.metrics.counts.tn},
                           {"fp", fold.metrics.counts.fp},
                           {"fn", fold.metrics.counts.fn}};
        json undefined = json::array();
        if (!fold.metrics.precision_defined) undefined.push_back("precision");
        if (!fold.metrics.recall_defined) undefined.push_back("recall");
        if (!fold.metrics.f1_defined) undefined.push_back("f1");
        if (!fold.metrics.auc_defined) undefined.push_back("auc");
        if (!undefined.empty()) f["undefined"] = undefined;
        if (fold.pca_k > 0) f["pca_components"] = fold.pca_k;
        if (!fold.selected_features.empty()) f["selected_features"] = fold.selected_features;
        folds.push_back(f);
    }
    j["folds"] = folds;

    auto summary_json = [](const MetricsSummary& s) {
        return json{{"accuracy", s.accuracy},
                    {"precision", s.precision},
                    {"recall", s.recall},
                    {"f1", s.f1},
                    {"auc", s.auc}};
    };
    j["aggregate"] = json{{"mean", summary_json(report.cv.mean)},
                          {"stddev", summary_json(report.cv.stddev)}};

    if (report.final_model.front.kind == FrontEndKind::pso)
        j["selected_features"] = report.final_model.front.selected_names;
    if (report.final_model.front.kind == FrontEndKind::pca)
        j["pca_components"] = report.final_model.front.pca.k;

    if (include_timings) j["timings_s"] = report.timings_s;
    return j;
}

std::string table5_header() { return "experiment,method,accuracy,precision,recall,f1,auc\n"; }

std::string table5_row(const std::string& name, const std::string& method,
                       const MetricsSummary& mean) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s,%s,%.6f,%.6f,%.6f,%.6f,%.6f\n", name.c_str(),
                  method.c_str(), mean.accuracy, mean.precision, mean.recall, mean.f1, mean.auc);
    return buf;
}

namespace {

void write_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write: " + path);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw DataError("failed writing: " + path);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw DataError("cannot move into place: " + path);
}

} // namespace

void write_experiment_outputs(const ExperimentReport& report, const std::string& out_dir) {
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);

    write_atomic((dir / "report.json").string(), report_json(report, true).dump(2) + "\n");
    write_atomic((dir / "audit.json").string(),
                 json{{"rows_in", report.audit.rows_in},
                      {"rows_out", report.audit.rows_out},
                      {"columns_dropped", report.audit.columns_dropped}}
                         .dump(2) +
                     "\n");
    write_atomic((dir / "table5.csv").string(),
                 table5_header() + table5_row(report.config.name, report.method, report.cv.mean));

    for (std::size_t i = 0; i < report.cv.folds.size(); ++i) {
        const auto& fold = report.cv.folds[i];
        if (fold.has_curves)
            write_atomic((dir / ("curves_fold" + std::to_string(i) + ".csv")).string(),
                         curves_csv(fold.curves));
    }

    if (report.final_model.front.kind == FrontEndKind::pso) {
        write_atomic((dir / "pso_history.csv").string(),
                     pso_history_csv(report.final_model.front.pso_history));
        write_atomic((dir / "selected_features.json").string(),
                     json(report.final_model.front.selected_names).dump(2) + "\n");
    }

    save_model(make_artifact(report.final_model, config_echo(report.config)),
               (dir / "model.stab").string());
}

MatrixResult run_matrix(const std::vector<std::string>& config_paths, const std::string& out_dir) {
    if (config_paths.empty()) throw ConfigError("run_matrix: no configs given");
    fs::create_directories(out_dir);

    MatrixResult result;
    result.all_ok = true;
    json comparison = json::array();
    std::ostringstream csv;
    csv << table5_header();

    for (const auto& path : config_paths) {
        MatrixRow row;
        row.name = fs::path(path).stem().string();
        try {
            ExperimentConfig config = parse_config_file(path);
            if (config.name == "experiment") config.name = row.name;
            row.name = config.name;
            ExperimentReport report = run_experiment(config);
            write_experiment_outputs(report, (fs::path(out_dir) / row.name).string());
            row.method = report.method;
            row.mean = report.cv.mean;
            row.ok = true;
            csv << table5_row(row.name, row.method, row.mean);
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
            result.all_ok = false;
            csv << row.name << "," << row.method << ",,,,,\n";
        }
        json entry;
        entry["experiment"] = row.name;
        entry["method"] = row.method;
        entry["ok"] = row.ok;
        if (row.ok) {
            entry["metrics"] = json{{"accuracy", row.mean.accuracy},
                                    {"precision", row.mean.precision},
                                    {"recall", row.mean.recall},
                                    {"f1", row.mean.f1},
                                    {"auc", row.mean.auc}};
        } else {
            entry["error"] = row.error;
        }
        comparison.push_back(entry);
        result.rows.push_back(std::move(row));
    }

    write_atomic((fs::path(out_dir) / "matrix.csv").string(), csv.str());
    write_atomic((fs::path(out_dir) / "comparison.json").string(), comparison.dump(2) + "\n");
    return result;
}

} // namespace swarmtab
