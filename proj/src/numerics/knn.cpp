#include "cellflow/numerics/knn.hpp"

#include "cellflow/error.hpp"
#include "cellflow/numerics/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace cellflow {

namespace {

// Sorted (squared distance, index) candidates, ties to the lower index.
std::vector<std::pair<double, Index>> nearest(const Matrix& data, const RowVector& q, Index k, Index skip) {
    std::vector<std::pair<double, Index>> cand;
    cand.reserve(static_cast<std::size_t>(data.rows()));
    for (Index j = 0; j < data.rows(); ++j) {
        if (j == skip) continue;
        cand.emplace_back((data.row(j) - q).squaredNorm(), j);
    }
    const auto kk = static_cast<std::ptrdiff_t>(std::min<std::size_t>(static_cast<std::size_t>(k), cand.size()));
    std::partial_sort(cand.begin(), cand.begin() + kk, cand.end());
    cand.resize(static_cast<std::size_t>(kk));
    return cand;
}

}  // namespace

NeighborLists knn_query(const Matrix& points, Index k, std::optional<double> max_dist) {
    const Index n = points.rows();
    require(k >= 1 && k < n, "knn_query: need 1 <= k < number of points");
    if (!all_finite(points)) fail(ErrorCode::Numeric, "knn_query: non-finite coordinates");

    NeighborLists out(static_cast<std::size_t>(n));
    const double cutoff_sq = max_dist ? (*max_dist) * (*max_dist) : 0.0;
    parallel_for(n, [&](std::ptrdiff_t i) {
        auto cand = nearest(points, points.row(i), k, i);
        auto& list = out[static_cast<std::size_t>(i)];
        for (const auto& [d2, j] : cand) {
            if (max_dist && d2 > cutoff_sq) continue;
            list.push_back(j);
        }
    });
    return out;
}

KnnResult knn_search(const Matrix& queries, const Matrix& data, Index k) {
    require(data.rows() >= 1, "knn_search: empty data");
    require(k >= 1 && k <= data.rows(), "knn_search: k out of range");
    require(queries.cols() == data.cols(), "knn_search: dimension mismatch");
    KnnResult res;
    res.indices.resize(static_cast<std::size_t>(queries.rows()));
    res.distances.resize(static_cast<std::size_t>(queries.rows()));
    parallel_for(queries.rows(), [&](std::ptrdiff_t i) {
        auto cand = nearest(data, queries.row(i), k, -1);
        auto& idx = res.indices[static_cast<std::size_t>(i)];
        auto& dist = res.distances[static_cast<std::size_t>(i)];
        for (const auto& [d2, j] : cand) {
            idx.push_back(j);
            dist.push_back(std::sqrt(d2));
        }
    });
    return res;
}

}  // namespace cellflow
