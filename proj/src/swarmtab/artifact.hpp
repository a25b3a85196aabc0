#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "swarmtab/pipeline.hpp"

namespace swarmtab {

// On-disk model container: "STAB" magic, version, JSON manifest (shapes,
// config echo, feature names, preprocessing statistics), a little-endian
// float64 blob holding every parameter, and a trailing CRC32.
struct ModelArtifact {
    std::uint32_t format_version = 1;
    std::string kind; // classifier kind tag
    nlohmann::json manifest;
    std::vector<double> blob;
};

void save_model(const ModelArtifact& artifact, const std::string& path);
ModelArtifact load_model(const std::string& path);

// Fitted front end + classifier bundled with the input-space column metadata,
// ready to score new rows.
struct PipelineModel {
    FrontEndModel front;
    TrainedModel model;
    std::vector<ColumnMeta> input_meta;
};

ModelArtifact make_artifact(const PipelineModel& pipeline, const nlohmann::json& resolved_config);
PipelineModel pipeline_from_artifact(const ModelArtifact& artifact);

// x is in the encoded dataset space: numerical columns in [0, 1], categorical
// columns as integer codes, one column per input_meta entry.
std::vector<double> pipeline_predict(const PipelineModel& pipeline, const Matrix& x);

} // namespace swarmtab
