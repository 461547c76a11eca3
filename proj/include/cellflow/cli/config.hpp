#pragma once

#include "cellflow/dynamics/model.hpp"
#include "cellflow/numerics/types.hpp"
#include "cellflow/training/train.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cellflow::cli {

struct DataSection {
    /// trifurcation, s_shape, branching, dying, growing or arc.
    std::string preset = "arc";
    /// Cells kept (GRN presets) or cells at t = 0 (toy sets). Resolved per preset.
    Index cells = 0;
    /// s_shape only: cells simulated before subsampling.
    Index simulated_cells = 990;
    Index timepoints = 5;
    /// GRN presets: integration steps per state transition. Resolved per preset.
    Index steps = 0;
    double library_lo = 1.0;
    double library_hi = 1.0;
    double dropout = 0.0;
    bool poisson = false;
    /// Also write synthetic cell locations for the features stage.
    bool spatial_layout = false;
};

struct GeometrySection {
    /// gaga, pca or identity (latent = expression as given).
    std::string method = "gaga";
    bool log1p = true;
    /// 0 skips the PCA step before the diffusion operator.
    Index pca_dim = 20;
    Index knn = 5;
    Index diffusion_t = 10;
    Index latent_dim = 2;
    std::vector<Index> hidden{64, 64};
    Index epochs = 300;
    Index batch_size = 256;
    double lr = 2e-3;
    double lambda_geo = 1.0;
    double lambda_rec = 0.1;
    /// Center latents and divide by their RMS radius.
    bool standardize = true;
};

struct SpatialSection {
    /// Train on [latent | weighted spatial features].
    bool enabled = false;
    Index k = 5;
    Index hops = 3;
    std::optional<double> max_dist;
    Index expression_pca_dim = 10;
    Index output_dim = 10;
    double weight = 1.0;
    std::vector<std::pair<Index, Index>> lr_pairs;
};

struct EvalSection {
    Index branches = 3;
    Index w1_cap = 1000;
    bool loo = false;
};

struct OutputSection {
    std::string dir = "out";
    int plot_width = 640;
    int plot_height = 480;
};

struct PipelineConfig {
    std::uint64_t seed = 0;
    DataSection data;
    GeometrySection geometry;
    SpatialSection spatial;
    /// latent_dim and seed are filled in by the stages.
    dynamics::DynamicsConfig dynamics;
    training::TrainConfig training;
    EvalSection eval;
    OutputSection output;
};

/// Config errors for unknown keys, wrong types, unknown enum strings or a
/// missing seed.
PipelineConfig parse_config(const nlohmann::json& doc);
PipelineConfig load_config(const std::filesystem::path& path);
/// Every field, defaults included.
nlohmann::json to_json(const PipelineConfig& cfg);

/// Stage seeds derived from the top-level seed.
enum class Stage : std::uint64_t { Embed = 2, Train = 3, Infer = 4, Evaluate = 5, Noise = 6, Layout = 7 };
std::uint64_t stage_seed(const PipelineConfig& cfg, Stage s);

}  // namespace cellflow::cli
