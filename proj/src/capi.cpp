#include "swarmtab/swarmtab.h"

#include <cstring>
#include <exception>
#include <fstream>
#include <string>
#include <vector>

#include "swarmtab/artifact.hpp"
#include "swarmtab/dataset.hpp"
#include "swarmtab/errors.hpp"
#include "swarmtab/experiment.hpp"

namespace {

thread_local std::string g_last_error;

template <typename Fn>
swarmtab_status guarded(Fn&& fn) {
    try {
        g_last_error.clear();
        return fn();
    } catch (const swarmtab::ConfigError& e) {
        g_last_error = e.what();
        return SWARMTAB_CONFIG_ERROR;
    } catch (const swarmtab::DataError& e) {
        g_last_error = e.what();
        return SWARMTAB_DATA_ERROR;
    } catch (const std::invalid_argument& e) {
        g_last_error = e.what();
        return SWARMTAB_INVALID_ARGUMENT;
    } catch (const std::out_of_range& e) {
        g_last_error = e.what();
        return SWARMTAB_INVALID_ARGUMENT;
    } catch (const std::ios_base::failure& e) {
        g_last_error = e.what();
        return SWARMTAB_IO_ERROR;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return SWARMTAB_RUNTIME_ERROR;
    } catch (...) {
        g_last_error = "unknown error";
        return SWARMTAB_RUNTIME_ERROR;
    }
}

} // namespace

struct swarmtab_model {
    swarmtab::PipelineModel pipeline;
    std::string kind;
    std::string manifest;
};

extern "C" {

const char* swarmtab_version(void) { return "1.0.0"; }

const char* swarmtab_status_name(swarmtab_status status) {
    switch (status) {
        case SWARMTAB_OK: return "ok";
        case SWARMTAB_PARTIAL_FAILURE: return "partial_failure";
        case SWARMTAB_CONFIG_ERROR: return "config_error";
        case SWARMTAB_DATA_ERROR: return "data_error";
        case SWARMTAB_RUNTIME_ERROR: return "runtime_error";
        case SWARMTAB_INVALID_ARGUMENT: return "invalid_argument";
        case SWARMTAB_IO_ERROR: return "io_error";
    }
    return "unknown";
}

const char* swarmtab_last_error(void) { return g_last_error.c_str(); }

swarmtab_status swarmtab_run_experiment(const char* config_path, const char* out_dir,
                                        const int64_t* seed_override) {
    if (config_path == nullptr) {
        g_last_error = "config_path is NULL";
        return SWARMTAB_INVALID_ARGUMENT;
    }
    return guarded([&]() -> swarmtab_status {
        swarmtab::ExperimentConfig config = swarmtab::parse_config_file(config_path);
        if (out_dir != nullptr) config.output_dir = out_dir;
        if (seed_override != nullptr)
            config.pipeline.seed = static_cast<std::uint64_t>(*seed_override);
        swarmtab::ExperimentReport report = swarmtab::run_experiment(config);
        swarmtab::write_experiment_outputs(report, config.output_dir);
        return SWARMTAB_OK;
    });
}

swarmtab_status swarmtab_run_matrix(const char* const* config_paths, size_t n_configs,
                                    const char* out_dir) {
    if (config_paths == nullptr || out_dir == nullptr) {
        g_last_error = "config_paths/out_dir is NULL";
        return SWARMTAB_INVALID_ARGUMENT;
    }
    return guarded([&]() -> swarmtab_status {
        std::vector<std::string> paths(config_paths, config_paths + n_configs);
        swarmtab::MatrixResult result = swarmtab::run_matrix(paths, out_dir);
        if (result.all_ok) return SWARMTAB_OK;
        std::string failed;
        for (const auto& row : result.rows)
            if (!row.ok) failed += (failed.empty() ? "" : "; ") + row.name + ": " + row.error;
        g_last_error = "some experiments failed: " + failed;
        return SWARMTAB_PARTIAL_FAILURE;
    });
}

swarmtab_status swarmtab_generate_synthetic(const char* spec_path, const char* out_csv) {
    if (spec_path == nullptr || out_csv == nullptr) {
        g_last_error = "spec_path/out_csv is NULL";
        return SWARMTAB_INVALID_ARGUMENT;
    }
    return guarded([&]() -> swarmtab_status {
        std::ifstream in(spec_path);
        if (!in) throw swarmtab::ConfigError(std::string("cannot open spec file: ") + spec_path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw swarmtab::ConfigError(std::string("spec file is not valid JSON: ") + e.what());
        }
        // reuse the experiment data-source schema
        j["type"] = "synth";
        nlohmann::json wrapper;
        wrapper["data"] = j;
        wrapper["classifier"] = {{"kind", "dt"}};
        swarmtab::ExperimentConfig config = swarmtab::parse_config_json(wrapper);
        swarmtab::SynthResult synth = swarmtab::generate_synthetic(config.data.synth);
        swarmtab::write_dataset_csv(synth.dataset, out_csv);
        return SWARMTAB_OK;
    });
}

swarmtab_status swarmtab_model_open(const char* path, swarmtab_model** out_model) {
    if (path == nullptr || out_model == nullptr) {
        g_last_error = "path/out_model is NULL";
        return SWARMTAB_INVALID_ARGUMENT;
    }
    *out_model = nullptr;
    return guarded([&]() -> swarmtab_status {
        swarmtab::ModelArtifact artifact = swarmtab::load_model(path);
        auto* handle = new swarmtab_model;
        handle->pipeline = swarmtab::pipeline_from_artifact(artifact);
        handle->kind = artifact.kind;
        handle->manifest = artifact.manifest.dump(2);
        *out_model = handle;
        return SWARMTAB_OK;
    });
}

void swarmtab_model_close(swarmtab_model* model) { delete model; }

const char* swarmtab_model_kind(const swarmtab_model* model) {
    return model ? model->kind.c_str() : "";
}

const char* swarmtab_model_manifest(const swarmtab_model* model) {
    return model ? model->manifest.c_str() : "";
}

size_t swarmtab_model_n_features(const swarmtab_model* model) {
    return model ? model->pipeline.input_meta.size() : 0;
}

swarmtab_status swarmtab_model_predict(const swarmtab_model* model, const double* features,
                                       size_t n_rows, size_t n_features,
                                       double* out_probabilities) {
    if (model == nullptr || features == nullptr || out_probabilities == nullptr) {
        g_last_error = "model/features/out_probabilities is NULL";
        return SWARMTAB_INVALID_ARGUMENT;
    }
    return guarded([&]() -> swarmtab_status {
        swarmtab::Matrix x(n_rows, n_features);
        std::memcpy(x.a.data(), features, n_rows * n_features * sizeof(double));
        std::vector<double> probs = swarmtab::pipeline_predict(model->pipeline, x);
        std::memcpy(out_probabilities, probs.data(), probs.size() * sizeof(double));
        return SWARMTAB_OK;
    });
}

} // extern "C"
