#include "cellflow/numerics/pca.hpp"

#include "cellflow/error.hpp"

#include <Eigen/Eigenvalues>

namespace cellflow {

PcaModel pca_fit(const Matrix& x, Index d) {
    require(x.rows() >= 2, "pca_fit: need at least two rows");
    require(d >= 1 && d <= std::min(x.rows(), x.cols()), "pca_fit: d out of range");
    if (!all_finite(x)) fail(ErrorCode::Numeric, "pca_fit: non-finite input");

    PcaModel model;
    model.mean = x.colwise().mean().transpose();
    const Matrix centered = x.rowwise() - model.mean.transpose();
    const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(x.rows() - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) fail(ErrorCode::Numeric, "pca_fit: eigendecomposition failed");

    // Eigen returns ascending eigenvalues.
    const Index p = x.cols();
    model.components.resize(d, p);
    model.explained_variance.resize(d);
    for (Index c = 0; c < d; ++c) {
        const Index src = p - 1 - c;
        Vector v = solver.eigenvectors().col(src);
        Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0.0) v = -v;
        model.components.row(c) = v.transpose();
        model.explained_variance(c) = std::max(0.0, solver.eigenvalues()(src));
    }
    return model;
}

Matrix PcaModel::transform(const Matrix& x) const {
    require(x.cols() == input_dim(), "PcaModel::transform: dimension mismatch");
    return (x.rowwise() - mean.transpose()) * components.transpose();
}

Matrix PcaModel::inverse_transform(const Matrix& scores) const {
    require(scores.cols() == output_dim(), "PcaModel::inverse_transform: dimension mismatch");
    return (scores * components).rowwise() + mean.transpose();
}

}  // namespace cellflow
