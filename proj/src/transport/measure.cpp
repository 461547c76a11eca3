#include "cellflow/transport/measure.hpp"

#include "cellflow/error.hpp"

namespace cellflow::transport {

DiscreteMeasure DiscreteMeasure::uniform(Matrix points) {
    require(points.rows() > 0, "DiscreteMeasure::uniform: empty support");
    DiscreteMeasure m;
    const auto n = static_cast<double>(points.rows());
    m.weights = Vector::Constant(points.rows(), 1.0 / n);
    m.support = std::move(points);
    return m;
}

Matrix ground_cost(const Matrix& x, const Matrix& y, int p) {
    require(p == 1 || p == 2, "ground_cost: p must be 1 or 2");
    Matrix c = pairwise_sq_distances(x, y);
    if (p == 1) c = c.array().sqrt().matrix();
    return c;
}

}  // namespace cellflow::transport
