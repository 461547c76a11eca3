#include "cellflow/geometry/diffusion.hpp"

#include "cellflow/error.hpp"
#include "cellflow/numerics/knn.hpp"
#include "cellflow/numerics/parallel.hpp"

#include <cmath>
#include <limits>

namespace cellflow::geometry {

DiffusionOperator diffusion_operator(const Matrix& x, Index k, Index t) {
    const Index n = x.rows();
    require(k >= 1, "diffusion_operator: k must be positive");
    require(n >= k + 1, "diffusion_operator: need at least k + 1 points");
    require(t >= 1, "diffusion_operator: t must be at least 1");
    require(all_finite(x), "diffusion_operator: non-finite input");

    const Matrix d = pairwise_distances(x, x);
    const auto nb = knn_query(x, k);
    Vector sigma(n);
    double smallest = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n; ++i) {
        sigma(i) = d(i, nb[i].back());
        if (sigma(i) > 0.0) smallest = std::min(smallest, sigma(i));
    }
    if (!std::isfinite(smallest)) fail(ErrorCode::Numeric, "diffusion_operator: all points are identical");
    for (Index i = 0; i < n; ++i)
        if (sigma(i) <= 0.0) sigma(i) = smallest;

    Matrix kernel(n, n);
    parallel_for(n, [&](std::ptrdiff_t i) {
        for (Index j = 0; j < n; ++j) {
            const double r = d(i, j) / sigma(i);
            kernel(i, j) = std::exp(-r * r);
        }
    });
    Matrix sym = 0.5 * (kernel + kernel.transpose());
    for (Index i = 0; i < n; ++i) sym.row(i) /= sym.row(i).sum();
    return {std::move(sym), std::move(sigma), t};
}

Matrix diffusion_power(const DiffusionOperator& op) {
    require(op.t >= 1, "diffusion_power: t must be at least 1");
    Matrix result;
    Matrix base = op.P;
    bool first = true;
    for (Index e = op.t; e > 0; e >>= 1) {
        if (e & 1) {
            if (first) result = base;
            else result = (result * base).eval();
            first = false;
        }
        if (e > 1) base = (base * base).eval();
    }
    return result;
}

PotentialDistances potential_distances(const DiffusionOperator& op) {
    const Matrix pt = diffusion_power(op);
    const Matrix logs = (pt.array() + kPotentialEps).log().matrix();
    Matrix dist = pairwise_distances(logs, logs);
    dist = 0.5 * (dist + dist.transpose()).eval();
    dist.diagonal().setZero();
    return {std::move(dist)};
}

}  // namespace cellflow::geometry
