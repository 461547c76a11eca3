#pragma once

#include "cellflow/numerics/types.hpp"

#include <cstdint>
#include <vector>

namespace cellflow::eval {

struct KMeansResult {
    /// k x d, sorted lexicographically so labels do not depend on row order.
    Matrix centers;
    std::vector<Index> labels;
    double inertia = 0.0;
};

/// k-means++ seeding plus Lloyd iterations; best inertia of `restarts` runs.
KMeansResult kmeans(const Matrix& x, Index k, std::uint64_t seed, int restarts = 20, int max_iter = 300);

struct BranchSummary {
    Index K = 0;
    /// K entries, each (steps + 1) x d.
    std::vector<Matrix> mean_paths;
    /// Branch of each trajectory.
    std::vector<Index> assignment;

    /// Fraction of trajectories in each branch.
    std::vector<double> shares() const;
};

/// Clusters trajectories on their endpoints and averages each cluster's
/// paths pointwise. `states` is the solver grid, each entry cells x d.
BranchSummary branch_means(const std::vector<Matrix>& states, Index K, std::uint64_t seed);

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

/// Per test point, the smallest Euclidean distance to any vertex of any mean
/// path; mean and population std over points.
MeanStd trajectory_error(const Matrix& test_points, const BranchSummary& summary);
std::vector<double> trajectory_distances(const Matrix& test_points, const BranchSummary& summary);

/// Baseline: pair each start cell with an end cell by exact OT (uniform
/// weights, largest plan entry in the row) and move along the straight line on
/// a grid of `steps` + 1 points.
std::vector<Matrix> straight_line_baseline(const Matrix& start, const Matrix& end, Index steps);

}  // namespace cellflow::eval
