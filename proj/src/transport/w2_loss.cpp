#include "cellflow/transport/w2_loss.hpp"

#include "cellflow/error.hpp"
#include "cellflow/transport/emd.hpp"
#include "cellflow/transport/sinkhorn.hpp"

namespace cellflow::transport {

W2Loss w2_loss(const DiscreteMeasure& pred, const DiscreteMeasure& target) {
    if (pred.size() == 0 || target.size() == 0) fail(ErrorCode::InvalidArgument, "w2_loss: empty measure");
    if (pred.dim() != target.dim()) fail(ErrorCode::ShapeMismatch, "w2_loss: dimension mismatch");
    const Matrix cost = ground_cost(pred.support, target.support, 2);

    W2Loss out;
    if (std::max(pred.size(), target.size()) <= kExactTransportLimit) {
        out.plan = emd_with_cost(pred.weights, target.weights, cost);
    } else {
        const double eps = std::max(0.01 * cost.mean(), 1e-12);
        out.plan = sinkhorn_with_cost(pred.weights, target.weights, cost, eps, 10000, 1e-9);
    }
    const Matrix& pi = out.plan.plan;
    out.cost = out.plan.cost;
    const Vector row_mass = pi.rowwise().sum();
    out.grad_points = 2.0 * (row_mass.asDiagonal() * pred.support - pi * target.support);
    out.grad_weights = out.plan.dual_f.array() - out.plan.dual_f.mean();
    return out;
}

}  // namespace cellflow::transport
