#pragma once

#include "cellflow/numerics/types.hpp"

namespace cellflow {

/// Centers rows and divides by one global scale so the mean squared
/// distance to the center is 1. Keeps relative distances intact.
struct LatentScaler {
    RowVector mean;
    double scale = 1.0;

    static LatentScaler fit(const Matrix& z);
    Matrix transform(const Matrix& z) const;
    Matrix inverse(const Matrix& u) const;
};

}  // namespace cellflow
