#pragma once

#include <Eigen/Dense>

#include <vector>

namespace cellflow {

using Index = Eigen::Index;
/// Dense real matrix, row-major: one sample per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

using NeighborLists = std::vector<std::vector<Index>>;

bool all_finite(const Matrix& m);
bool all_finite(const Vector& v);

/// Squared Euclidean distances between rows of `a` and rows of `b` (|a| x |b|).
Matrix pairwise_sq_distances(const Matrix& a, const Matrix& b);
Matrix pairwise_distances(const Matrix& a, const Matrix& b);

/// Rows of `m` selected by `rows`, in order.
Matrix take_rows(const Matrix& m, const std::vector<Index>& rows);

Matrix vstack(const std::vector<Matrix>& blocks);

}  // namespace cellflow
