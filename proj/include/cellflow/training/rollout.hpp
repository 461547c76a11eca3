#pragma once

#include "cellflow/dynamics/model.hpp"

#include <cstdint>
#include <vector>

namespace cellflow::training {

/// Chained prediction from the first snapshot through every later timepoint.
struct Rollout {
    /// Concatenated solver grid, each cells x d.
    std::vector<Matrix> states;
    std::vector<double> times;
    /// Mass of each cell at every grid point. Constant inside a segment; a
    /// segment's end carries the product of h(source, t_s) up to it.
    std::vector<Vector> masses;
    /// Grid index of each requested timepoint.
    std::vector<Index> checkpoints;

    Index cells() const { return states.empty() ? 0 : states.front().rows(); }
    const Matrix& at(std::size_t timepoint) const { return states[static_cast<std::size_t>(checkpoints[timepoint])]; }
    const Vector& mass_at(std::size_t timepoint) const {
        return masses[static_cast<std::size_t>(checkpoints[timepoint])];
    }
    /// steps + 1 x d path of one cell.
    Matrix path(Index cell) const;
};

/// Segment s is integrated with noise seed derive_seed(noise_seed, {s}),
/// matching training.
Rollout rollout(const dynamics::DynamicsModel& model, const Matrix& z0, const std::vector<double>& times,
                Index steps_per_unit, bool use_growth, std::uint64_t noise_seed);

}  // namespace cellflow::training
