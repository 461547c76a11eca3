#include "cellflow/numerics/types.hpp"

#include "cellflow/error.hpp"
#include "cellflow/numerics/parallel.hpp"

#include <cmath>

namespace cellflow {

bool all_finite(const Matrix& m) { return m.allFinite(); }
bool all_finite(const Vector& v) { return v.allFinite(); }

Matrix pairwise_sq_distances(const Matrix& a, const Matrix& b) {
    require(a.cols() == b.cols(), "pairwise distances: column mismatch");
    Matrix out(a.rows(), b.rows());
    parallel_for(a.rows(), [&](std::ptrdiff_t i) {
        for (Index j = 0; j < b.rows(); ++j) out(i, j) = (a.row(i) - b.row(j)).squaredNorm();
    });
    return out;
}

Matrix pairwise_distances(const Matrix& a, const Matrix& b) {
    return pairwise_sq_distances(a, b).array().sqrt().matrix();
}

Matrix take_rows(const Matrix& m, const std::vector<Index>& rows) {
    Matrix out(static_cast<Index>(rows.size()), m.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        require(rows[r] >= 0 && rows[r] < m.rows(), "take_rows: index out of range");
        out.row(static_cast<Index>(r)) = m.row(rows[r]);
    }
    return out;
}

Matrix vstack(const std::vector<Matrix>& blocks) {
    Index rows = 0;
    Index cols = blocks.empty() ? 0 : blocks.front().cols();
    for (const auto& b : blocks) {
        require(b.cols() == cols, "vstack: column mismatch");
        rows += b.rows();
    }
    Matrix out(rows, cols);
    Index r = 0;
    for (const auto& b : blocks) {
        out.middleRows(r, b.rows()) = b;
        r += b.rows();
    }
    return out;
}

}  // namespace cellflow
