#pragma once

#include "cellflow/cli/config.hpp"
#include "cellflow/error.hpp"

#include <string>
#include <vector>

namespace cellflow::cli {

// File names inside the output directory.
namespace files {
inline constexpr const char* expression = "expression.csv";
inline constexpr const char* labels = "labels.csv";
inline constexpr const char* manifest = "manifest.json";
inline constexpr const char* locations = "locations.csv";
inline constexpr const char* latent = "latent.csv";
inline constexpr const char* embedding = "embedding.json";
inline constexpr const char* autoencoder = "autoencoder.json";
inline constexpr const char* features = "spatial_features.csv";
inline constexpr const char* model = "model.json";
inline constexpr const char* loss = "loss.csv";
inline constexpr const char* trajectories = "trajectories.jsonl";
inline constexpr const char* metrics = "metrics.csv";
inline constexpr const char* plot = "plot.svg";
}  // namespace files

void cmd_simulate(const PipelineConfig& cfg);
void cmd_embed(const PipelineConfig& cfg);
void cmd_features(const PipelineConfig& cfg);
void cmd_train(const PipelineConfig& cfg);
void cmd_infer(const PipelineConfig& cfg);
void cmd_evaluate(const PipelineConfig& cfg);
void cmd_plot(const PipelineConfig& cfg);

const std::vector<std::string>& command_names();
/// Runs one stage and writes config.<name>.json next to its outputs.
void run_command(const std::string& name, const PipelineConfig& cfg);

/// 0 ok, 2 config or invalid value, 3 missing input, 4 numeric failure,
/// 5 shape mismatch, 6 checkpoint version mismatch, 7 malformed input file.
int exit_code(ErrorCode code);

}  // namespace cellflow::cli
