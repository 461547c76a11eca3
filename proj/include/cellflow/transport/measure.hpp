#pragma once

#include "cellflow/numerics/types.hpp"

namespace cellflow::transport {

/// Weighted point cloud; weights are masses.
struct DiscreteMeasure {
    Matrix support;
    Vector weights;

    Index size() const { return support.rows(); }
    Index dim() const { return support.cols(); }
    double total_mass() const { return weights.sum(); }

    /// Equal weights summing to one.
    static DiscreteMeasure uniform(Matrix points);
};

/// Coupling with duals and diagnostics.
struct TransportPlan {
    Matrix plan;
    /// sum plan .* ground cost (entropy and KL terms excluded)
    double cost = 0.0;
    Vector dual_f;
    Vector dual_g;
    /// L1 deviation of the plan's row / column sums from the input weights.
    double residual_source = 0.0;
    double residual_target = 0.0;
    bool converged = true;
    int iterations = 0;

    Vector source_marginal() const { return plan.rowwise().sum(); }
    Vector target_marginal() const { return plan.colwise().sum().transpose(); }
};

/// d(x, y)^p between rows; p = 2 gives squared Euclidean, p = 1 Euclidean.
Matrix ground_cost(const Matrix& x, const Matrix& y, int p);

}  // namespace cellflow::transport
