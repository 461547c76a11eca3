#pragma once

#include "cellflow/dynamics/integrate.hpp"
#include "cellflow/numerics/types.hpp"

namespace cellflow::training {

/// Mean over cells of sum_k h |f(z_k, t_k)|^2, from the stored drift evaluations.
double energy_loss(const dynamics::TrajectoryBatch& batch);
/// d energy / d f_k for every step.
std::vector<Matrix> energy_loss_grad(const dynamics::TrajectoryBatch& batch);

struct DensityLoss {
    double value = 0.0;
    /// d value / d pred
    Matrix grad;
};

/// For each predicted point, sum over its k nearest data points of
/// max(0, dist - margin); averaged over predicted points.
DensityLoss density_loss(const Matrix& pred, const Matrix& data, Index k, double margin);

struct MarginalLoss {
    /// Squared 2-Wasserstein distance.
    double value = 0.0;
    Matrix grad_points;
    /// Gradient with respect to the unnormalized masses.
    Vector grad_masses;
};

/// W2^2 between the predicted points weighted by masses / sum(masses) and the
/// uniform measure on the targets.
MarginalLoss marginal_loss(const Matrix& pred, const Vector& masses, const Matrix& target);

}  // namespace cellflow::training
