#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "swarmtab/artifact.hpp"
#include "swarmtab/pipeline.hpp"

namespace swarmtab {

struct DataSourceConfig {
    bool is_synth = false;
    // csv
    std::string path;
    std::string target_column;
    std::string positive_label;
    double min_non_null = 0.01;
    bool use_hfea_criteria = false;
    std::optional<SelectionCriteria> criteria;
    // synth
    SynthSpec synth;
};

struct ExperimentConfig {
    std::string name = "experiment";
    DataSourceConfig data;
    PipelineSpec pipeline;
    std::string output_dir = "out";
};

// Strict parse: unknown keys anywhere are an error naming the key path;
// defaults come from the published model/optimizer settings.
ExperimentConfig parse_config_json(const nlohmann::json& j);
ExperimentConfig parse_config_file(const std::string& path);

// Fully resolved echo, itself parseable by parse_config_json.
nlohmann::json config_echo(const ExperimentConfig& config);

struct ExperimentReport {
    ExperimentConfig config;
    std::string method; // e.g. "pso+tabtransformer"
    PreprocessAudit audit;
    CvResult cv;
    PipelineModel final_model; // refit on all rows after CV
    std::map<std::string, double> timings_s;
};

// dataset -> front end -> classifier -> cross_validate, then a final refit on
// all rows. Deterministic per seed.
ExperimentReport run_experiment(const ExperimentConfig& config);

// Report JSON; timings are held in a separate top-level key so determinism
// checks can drop them.
nlohmann::json report_json(const ExperimentReport& report, bool include_timings = true);

// report.json, table5.csv, curves_fold<i>.csv, pso history/selection files,
// audit.json and model.stab under out_dir (created if needed). All writes are
// atomic (write-temp, rename).
void write_experiment_outputs(const ExperimentReport& report, const std::string& out_dir);

std::string table5_header();
std::string table5_row(const std::string& name, const std::string& method,
                       const MetricsSummary& mean);

struct MatrixRow {
    std::string name;
    std::string method;
    bool ok = false;
    std::string error;
    MetricsSummary mean;
};

struct MatrixResult {
    std::vector<MatrixRow> rows;
    bool all_ok = false;
};

// Runs every config (continuing past failures), writes per-experiment outputs
// under out_dir/<name>, plus a combined matrix.csv and comparison.json.
MatrixResult run_matrix(const std::vector<std::string>& config_paths, const std::string& out_dir);

// Resolve a dataset (CSV pipeline or synthetic) per the data source config.
std::pair<Dataset, PreprocessAudit> resolve_dataset(const DataSourceConfig& data);

} // namespace swarmtab
