// swarmtab CLI: thin front over the C API in swarmtab/swarmtab.h.
#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "swarmtab/swarmtab.h"

namespace {

namespace fs = std::filesystem;

int report_status(swarmtab_status status) {
    if (status != SWARMTAB_OK) {
        std::cerr << "error (" << swarmtab_status_name(status) << "): " << swarmtab_last_error()
                  << "\n";
    }
    return static_cast<int>(status);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"swarmtab: feature-optimized tabular classification pipelines"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(swarmtab_version()));

    // run
    auto* run = app.add_subcommand("run", "Run one experiment from a JSON config");
    std::string run_config, run_out;
    std::int64_t run_seed = 0;
    bool run_has_seed = false;
    run->add_option("--config", run_config, "Experiment config JSON")->required();
    run->add_option("--out", run_out, "Output directory (overrides config)");
    run->add_option("--seed", run_seed, "Evaluation seed override")
        ->each([&](const std::string&) { run_has_seed = true; });

    // matrix
    auto* matrix = app.add_subcommand("matrix", "Run every config in a directory");
    std::string matrix_dir, matrix_out = "matrix_out";
    matrix->add_option("--configs", matrix_dir, "Directory of *.json configs")->required();
    matrix->add_option("--out", matrix_out, "Output directory");

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset CSV");
    std::string synth_spec, synth_out;
    synth->add_option("--spec", synth_spec, "Synthetic spec JSON")->required();
    synth->add_option("--out", synth_out, "Output CSV path")->required();

    // inspect
    auto* inspect = app.add_subcommand("inspect", "Print a model artifact's manifest");
    std::string inspect_model;
    inspect->add_option("--model", inspect_model, "Path to model.stab")->required();

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        const std::int64_t seed = run_seed;
        return report_status(swarmtab_run_experiment(run_config.c_str(),
                                                     run_out.empty() ? nullptr : run_out.c_str(),
                                                     run_has_seed ? &seed : nullptr));
    }

    if (matrix->parsed()) {
        std::vector<std::string> paths;
        std::error_code ec;
        for (const auto& entry : fs::directory_iterator(matrix_dir, ec))
            if (entry.path().extension() == ".json") paths.push_back(entry.path().string());
        if (ec) {
            std::cerr << "error (io_error): cannot list " << matrix_dir << "\n";
            return static_cast<int>(SWARMTAB_IO_ERROR);
        }
        std::sort(paths.begin(), paths.end());
        std::vector<const char*> cpaths;
        for (const auto& p : paths) cpaths.push_back(p.c_str());
        const swarmtab_status status =
            swarmtab_run_matrix(cpaths.data(), cpaths.size(), matrix_out.c_str());
        if (status == SWARMTAB_OK)
            std::cout << "matrix complete: " << paths.size() << " experiments -> " << matrix_out
                      << "/matrix.csv\n";
        return report_status(status);
    }

    if (synth->parsed())
        return report_status(swarmtab_generate_synthetic(synth_spec.c_str(), synth_out.c_str()));

    if (inspect->parsed()) {
        swarmtab_model* model = nullptr;
        const swarmtab_status status = swarmtab_model_open(inspect_model.c_str(), &model);
        if (status != SWARMTAB_OK) return report_status(status);
        std::cout << "kind: " << swarmtab_model_kind(model) << "\n"
                  << "input features: " << swarmtab_model_n_features(model) << "\n"
                  << swarmtab_model_manifest(model) << "\n";
        swarmtab_model_close(model);
        return 0;
    }

    return 0;
}
