#pragma once

#include "cellflow/numerics/types.hpp"

#include <cstdint>

namespace cellflow::eval {

/// Exact W1 (Euclidean ground metric) between uniform empirical measures,
/// each side subsampled to at most `cap` points. The subsample of a side
/// depends only on its contents and the seed, and the sides are put in a
/// canonical order, so w1(X, Y) == w1(Y, X) bitwise.
double w1(const Matrix& x, const Matrix& y, Index cap = 1000, std::uint64_t seed = 0);

/// Weighted variant: weights are renormalized after subsampling.
double w1(const Matrix& x, const Vector& wx, const Matrix& y, const Vector& wy, Index cap = 1000,
          std::uint64_t seed = 0);

/// Biased (V-statistic) squared MMD with a Gaussian kernel exp(-d^2 / (2 s^2)),
/// s = median pooled pairwise distance (1 when that median is 0).
double mmd_gaussian(const Matrix& x, const Matrix& y);

/// The bandwidth mmd_gaussian uses.
double median_bandwidth(const Matrix& x, const Matrix& y);

/// || mean(x) - mean(y) ||_2
double mmd_mean(const Matrix& x, const Matrix& y);

}  // namespace cellflow::eval
