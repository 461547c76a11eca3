#include "cellflow/training/losses.hpp"

#include "cellflow/error.hpp"
#include "cellflow/numerics/knn.hpp"
#include "cellflow/transport/w2_loss.hpp"

namespace cellflow::training {

double energy_loss(const dynamics::TrajectoryBatch& batch) {
    double total = 0.0;
    for (const Matrix& f : batch.drift_evals) total += batch.step * f.squaredNorm();
    return batch.cells() > 0 ? total / static_cast<double>(batch.cells()) : 0.0;
}

std::vector<Matrix> energy_loss_grad(const dynamics::TrajectoryBatch& batch) {
    std::vector<Matrix> g;
    g.reserve(batch.drift_evals.size());
    const double scale = 2.0 * batch.step / static_cast<double>(std::max<Index>(1, batch.cells()));
    for (const Matrix& f : batch.drift_evals) g.push_back(scale * f);
    return g;
}

DensityLoss density_loss(const Matrix& pred, const Matrix& data, Index k, double margin) {
    if (data.rows() == 0) fail(ErrorCode::InvalidArgument, "density_loss: empty data");
    require(k >= 1 && k <= data.rows(), "density_loss: k must lie in [1, |data|]");
    require(margin >= 0.0, "density_loss: margin must be nonnegative");
    if (pred.cols() != data.cols()) fail(ErrorCode::ShapeMismatch, "density_loss: dimension mismatch");
    DensityLoss out{0.0, Matrix::Zero(pred.rows(), pred.cols())};
    if (pred.rows() == 0) return out;
    const auto nb = knn_search(pred, data, k);
    const double inv = 1.0 / static_cast<double>(pred.rows());
    for (Index i = 0; i < pred.rows(); ++i) {
        for (Index j = 0; j < k; ++j) {
            const double dist = nb.distances[i][j];
            if (dist <= margin) continue;
            out.value += dist - margin;
            out.grad.row(i) += inv * (pred.row(i) - data.row(nb.indices[i][j])) / dist;
        }
    }
    out.value *= inv;
    return out;
}

MarginalLoss marginal_loss(const Matrix& pred, const Vector& masses, const Matrix& target) {
    require(masses.size() == pred.rows(), "marginal_loss: one mass per predicted point");
    require(masses.size() > 0 && masses.minCoeff() > 0.0, "marginal_loss: masses must be positive");
    const double total = masses.sum();
    transport::DiscreteMeasure mu{pred, masses / total};
    const auto w2 = transport::w2_loss(mu, transport::DiscreteMeasure::uniform(target));
    MarginalLoss out;
    out.value = w2.cost;
    out.grad_points = w2.grad_points;
    // w = m / S: dL/dm_i = (g_i - <w, g>) / S
    out.grad_masses = (w2.grad_weights.array() - mu.weights.dot(w2.grad_weights)).matrix() / total;
    return out;
}

}  // namespace cellflow::training
