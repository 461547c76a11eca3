#pragma once

#include "cellflow/dynamics/model.hpp"
#include "cellflow/numerics/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cellflow::training {

enum class TrainMode { Local, Global };

std::string to_string(TrainMode m);
TrainMode train_mode_from_string(const std::string& s);

struct UotParams {
    /// All three are multiplied by the mean squared distance of each pair.
    double eps = 0.05;
    double lambda_source = 1.0;
    double lambda_target = 100.0;
};

struct TrainConfig {
    double lambda_m = 1.0;
    double lambda_e = 0.01;
    double lambda_d = 0.1;
    Index k_density = 5;
    /// Defaults to 0.1 x the median pairwise latent distance.
    std::optional<double> h_margin;
    Index batch_size = 128;
    Index iterations = 500;
    double lr = 1e-3;
    /// Cosine decay from lr to lr * lr_final over the run; 1 keeps it constant.
    double lr_final = 0.1;
    /// Growth network learning rate relative to lr.
    double growth_lr_scale = 0.1;
    std::uint64_t seed = 0;
    TrainMode mode = TrainMode::Local;
    Index steps_per_unit = 10;
    bool growth_enabled = false;
    /// Warm-start the growth network from unbalanced OT before training.
    bool pretrain_growth = true;
    Index pretrain_epochs = 300;
    double pretrain_lr = 5e-3;
    UotParams uot;
};

/// Per-cell growth targets n_t * pi_1 for every source timepoint.
struct GrowthTargets {
    std::vector<Vector> masses;
};

struct LossParts {
    double total = 0.0;
    double marginal = 0.0;
    double energy = 0.0;
    double density = 0.0;
    /// Marginal term of each segment t -> t + 1.
    std::vector<double> segment_marginal;
};

struct ObjectiveGradient {
    LossParts loss;
    Vector drift;
    Vector diffusion;
    Vector growth;
};

struct TrainResult {
    dynamics::DynamicsModel model;
    std::vector<LossParts> history;
    double h_margin = 0.0;
    std::optional<GrowthTargets> growth_targets;
};

/// Growth targets from unbalanced OT between adjacent snapshots.
GrowthTargets growth_targets(const std::vector<Matrix>& z, const UotParams& uot);

/// Regresses the growth head onto the targets by squared error. Returns the
/// mean squared error before and after fitting.
std::pair<double, double> fit_growth(dynamics::DynamicsModel& model, const std::vector<Matrix>& z,
                                     const std::vector<double>& times, const GrowthTargets& targets, Index epochs,
                                     double lr);

/// growth_targets followed by fit_growth.
GrowthTargets pretrain_growth(dynamics::DynamicsModel& model, const std::vector<Matrix>& z,
                              const std::vector<double>& times, const UotParams& uot, Index epochs, double lr);

/// Number of solver steps for an interval.
Index segment_steps(double t0, double t1, Index steps_per_unit);

/// Loss and parameter gradients for one set of per-timepoint batches. `full` holds the complete snapshots used by the density term.
ObjectiveGradient objective(const dynamics::DynamicsModel& model, const std::vector<Matrix>& batches,
                            const std::vector<Matrix>& full, const std::vector<double>& times, const TrainConfig& cfg,
                            double h_margin, std::uint64_t noise_seed);

/// Trains drift, diffusion (sde mode) and growth (when enabled) on
/// per-timepoint latents. The model's solver settings are used as given.
TrainResult train(dynamics::DynamicsModel model, const std::vector<Matrix>& z, const std::vector<double>& times,
                  const TrainConfig& cfg);

}  // namespace cellflow::training
