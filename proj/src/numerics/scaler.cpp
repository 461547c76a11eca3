#include "cellflow/numerics/scaler.hpp"

#include "cellflow/error.hpp"

#include <cmath>

namespace cellflow {

LatentScaler LatentScaler::fit(const Matrix& z) {
    require(z.rows() >= 1 && z.cols() >= 1, "LatentScaler: empty input");
    LatentScaler s;
    s.mean = z.colwise().mean();
    const double ms = (z.rowwise() - s.mean).squaredNorm() / static_cast<double>(z.rows());
    if (!std::isfinite(ms)) fail(ErrorCode::Numeric, "LatentScaler: non-finite input");
    s.scale = ms > 0.0 ? std::sqrt(ms) : 1.0;
    return s;
}

Matrix LatentScaler::transform(const Matrix& z) const {
    if (z.cols() != mean.size()) fail(ErrorCode::ShapeMismatch, "LatentScaler: column count differs from the fit");
    return (z.rowwise() - mean) / scale;
}

Matrix LatentScaler::inverse(const Matrix& u) const {
    if (u.cols() != mean.size()) fail(ErrorCode::ShapeMismatch, "LatentScaler: column count differs from the fit");
    return (u * scale).rowwise() + mean;
}

}  // namespace cellflow
