#include "cellflow/eval/metrics.hpp"

#include "cellflow/error.hpp"
#include "cellflow/numerics/rng.hpp"
#include "cellflow/numerics/stats.hpp"
#include "cellflow/transport/emd.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <vector>

namespace cellflow::eval {

namespace {

std::uint64_t content_hash(const Matrix& m, const Vector* w) {
    std::uint64_t h = mix64(static_cast<std::uint64_t>(m.rows()) * 31 + static_cast<std::uint64_t>(m.cols()));
    for (Index i = 0; i < m.size(); ++i) h = mix64(h ^ std::bit_cast<std::uint64_t>(m.data()[i]));
    if (w)
        for (Index i = 0; i < w->size(); ++i) h = mix64(h ^ std::bit_cast<std::uint64_t>((*w)[i]));
    return h;
}

struct Side {
    Matrix points;
    Vector weights;
};

Side subsample(const Matrix& m, const Vector& w, Index cap, std::uint64_t seed, std::uint64_t tag) {
    if (m.rows() <= cap) return {m, w / w.sum()};
    Rng rng(seed, tag);
    auto perm = rng.permutation(m.rows());
    std::vector<Index> keep(perm.begin(), perm.begin() + cap);
    std::sort(keep.begin(), keep.end());
    Side s{take_rows(m, keep), Vector(cap)};
    for (Index i = 0; i < cap; ++i) s.weights[i] = w[keep[static_cast<std::size_t>(i)]];
    require(s.weights.sum() > 0.0, "w1: subsample has zero total weight");
    s.weights /= s.weights.sum();
    return s;
}

void check_pair(const Matrix& x, const Matrix& y, const char* who) {
    require(x.rows() > 0 && y.rows() > 0, std::string(who) + ": empty sample");
    if (x.cols() != y.cols()) fail(ErrorCode::ShapeMismatch, std::string(who) + ": dimension mismatch");
    if (!all_finite(x) || !all_finite(y)) fail(ErrorCode::Numeric, std::string(who) + ": non-finite input");
}

}  // namespace

double w1(const Matrix& x, const Matrix& y, Index cap, std::uint64_t seed) {
    return w1(x, Vector::Ones(x.rows()), y, Vector::Ones(y.rows()), cap, seed);
}

double w1(const Matrix& x, const Vector& wx, const Matrix& y, const Vector& wy, Index cap, std::uint64_t seed) {
    check_pair(x, y, "w1");
    require(cap >= 1, "w1: cap must be positive");
    require(wx.size() == x.rows() && wy.size() == y.rows(), "w1: one weight per point");
    require((wx.array() >= 0).all() && (wy.array() >= 0).all() && wx.sum() > 0 && wy.sum() > 0,
            "w1: weights must be nonnegative with positive total");
    const std::uint64_t hx = content_hash(x, &wx), hy = content_hash(y, &wy);
    const Side a = subsample(x, wx, cap, seed, hx), b = subsample(y, wy, cap, seed, hy);
    const bool swap = hy < hx;
    const Side& first = swap ? b : a;
    const Side& second = swap ? a : b;
    return transport::emd({first.points, first.weights}, {second.points, second.weights}, 1).cost;
}

double median_bandwidth(const Matrix& x, const Matrix& y) {
    check_pair(x, y, "mmd_gaussian");
    const Matrix pooled = vstack({x, y});
    const Matrix d = pairwise_distances(pooled, pooled);
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(pooled.rows() * (pooled.rows() - 1) / 2));
    for (Index i = 0; i < pooled.rows(); ++i)
        for (Index j = i + 1; j < pooled.rows(); ++j) v.push_back(d(i, j));
    if (v.empty()) return 1.0;
    const double med = median(std::move(v));
    return med > 0.0 ? med : 1.0;
}

double mmd_gaussian(const Matrix& x, const Matrix& y) {
    const double s = median_bandwidth(x, y);
    const double inv = 1.0 / (2.0 * s * s);
    auto mean_kernel = [&](const Matrix& a, const Matrix& b) {
        return (-inv * pairwise_sq_distances(a, b).array()).exp().mean();
    };
    return std::max(mean_kernel(x, x) + mean_kernel(y, y) - 2.0 * mean_kernel(x, y), 0.0);
}

double mmd_mean(const Matrix& x, const Matrix& y) {
    check_pair(x, y, "mmd_mean");
    return (x.colwise().mean() - y.colwise().mean()).norm();
}

}  // namespace cellflow::eval
