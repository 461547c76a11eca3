#pragma once

#include "cellflow/numerics/types.hpp"

namespace cellflow::geometry {

struct DiffusionOperator {
    /// Row-stochastic n x n Markov matrix.
    Matrix P;
    /// Adaptive kernel scale per point (distance to its k-th neighbor).
    Vector bandwidths;
    /// Diffusion steps used for potentials.
    Index t = 1;
};

struct PotentialDistances {
    /// Symmetric, zero diagonal.
    Matrix D;
};

/// Offset inside the log of the powered operator.
inline constexpr double kPotentialEps = 1e-7;

/// Adaptive Gaussian kernel exp(-(d / sigma_i)^2), averaged with its
/// transpose and row-normalized. Zero bandwidths (duplicates) take the
/// smallest positive bandwidth.
DiffusionOperator diffusion_operator(const Matrix& x, Index k, Index t);

/// P^t by repeated squaring.
Matrix diffusion_power(const DiffusionOperator& op);

/// Euclidean distances between rows of log(P^t + eps).
PotentialDistances potential_distances(const DiffusionOperator& op);

}  // namespace cellflow::geometry
