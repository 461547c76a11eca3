#pragma once

#include "cellflow/numerics/types.hpp"

namespace cellflow {

struct PcaModel {
    Vector mean;
    /// Output dim x input dim, orthonormal rows.
    Matrix components;
    /// Nonincreasing, nonnegative.
    Vector explained_variance;

    Index input_dim() const { return components.cols(); }
    Index output_dim() const { return components.rows(); }

    Matrix transform(const Matrix& x) const;
    Matrix inverse_transform(const Matrix& scores) const;
};

/// Top-d principal components from the covariance eigendecomposition.
/// Each component is signed so its largest-magnitude entry is positive.
PcaModel pca_fit(const Matrix& x, Index d);

}  // namespace cellflow
