#pragma once

#include "cellflow/numerics/types.hpp"

#include <optional>

namespace cellflow {

/// For each point, its k nearest other points by Euclidean distance (ties to
/// the lower index). Neighbors farther than max_dist are dropped when given.
NeighborLists knn_query(const Matrix& points, Index k, std::optional<double> max_dist = std::nullopt);

struct KnnResult {
    /// queries x k
    std::vector<std::vector<Index>> indices;
    std::vector<std::vector<double>> distances;
};

/// k nearest rows of `data` for every row of `queries` (no self exclusion).
KnnResult knn_search(const Matrix& queries, const Matrix& data, Index k);

}  // namespace cellflow
