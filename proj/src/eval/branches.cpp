#include "cellflow/eval/branches.hpp"

#include "cellflow/error.hpp"
#include "cellflow/numerics/rng.hpp"
#include "cellflow/transport/emd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace cellflow::eval {

namespace {

struct Run {
    Matrix centers;
    std::vector<Index> labels;
    double inertia = 0.0;
};

Index nearest(const Matrix& centers, const Matrix& x, Index i, double* dist) {
    Index best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < centers.rows(); ++j) {
        const double d = (x.row(i) - centers.row(j)).squaredNorm();
        if (d < bd) bd = d, best = j;
    }
    if (dist) *dist = bd;
    return best;
}

Run lloyd(const Matrix& x, Index k, Rng& rng, int max_iter) {
    const Index n = x.rows();
    Run r;
    r.centers.resize(k, x.cols());
    // k-means++ seeding
    r.centers.row(0) = x.row(static_cast<Index>(rng.below(static_cast<std::uint64_t>(n))));
    Vector d2(n);
    for (Index i = 0; i < n; ++i) d2[i] = (x.row(i) - r.centers.row(0)).squaredNorm();
    for (Index c = 1; c < k; ++c) {
        const double total = d2.sum();
        Index pick = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
        if (total > 0.0) {
            double u = rng.uniform() * total;
            for (Index i = 0; i < n; ++i) {
                u -= d2[i];
                if (u < 0.0 || i == n - 1) {
                    pick = i;
                    break;
                }
            }
        }
        r.centers.row(c) = x.row(pick);
        for (Index i = 0; i < n; ++i) d2[i] = std::min(d2[i], (x.row(i) - r.centers.row(c)).squaredNorm());
    }

    r.labels.assign(static_cast<std::size_t>(n), -1);
    for (int it = 0; it < max_iter; ++it) {
        bool changed = false;
        Vector dist(n);
        for (Index i = 0; i < n; ++i) {
            const Index j = nearest(r.centers, x, i, &dist[i]);
            if (j != r.labels[i]) r.labels[i] = j, changed = true;
        }
        if (!changed) break;
        Matrix sums = Matrix::Zero(k, x.cols());
        std::vector<Index> counts(static_cast<std::size_t>(k), 0);
        for (Index i = 0; i < n; ++i) {
            sums.row(r.labels[i]) += x.row(i);
            ++counts[r.labels[i]];
        }
        for (Index j = 0; j < k; ++j) {
            if (counts[j] > 0) {
                r.centers.row(j) = sums.row(j) / static_cast<double>(counts[j]);
            } else {
                // empty cluster takes the point farthest from its center
                Index far = 0;
                dist.maxCoeff(&far);
                r.centers.row(j) = x.row(far);
                dist[far] = 0.0;
            }
        }
    }
    r.inertia = 0.0;
    for (Index i = 0; i < n; ++i) r.inertia += (x.row(i) - r.centers.row(r.labels[i])).squaredNorm();
    return r;
}

}  // namespace

KMeansResult kmeans(const Matrix& x, Index k, std::uint64_t seed, int restarts, int max_iter) {
    require(k >= 1, "kmeans: k must be positive");
    require(x.rows() >= k, "kmeans: fewer points than clusters");
    require(restarts >= 1 && max_iter >= 1, "kmeans: restarts and max_iter must be positive");
    if (!all_finite(x)) fail(ErrorCode::Numeric, "kmeans: non-finite input");

    const Rng base(seed, 0x6b6d65616e73ULL);
    Run best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        Rng rng = base.substream(static_cast<std::uint64_t>(r));
        Run run = lloyd(x, k, rng, max_iter);
        if (run.inertia < best.inertia) best = std::move(run);
    }

    std::vector<Index> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
        for (Index c = 0; c < x.cols(); ++c)
            if (best.centers(a, c) != best.centers(b, c)) return best.centers(a, c) < best.centers(b, c);
        return a < b;
    });
    std::vector<Index> relabel(static_cast<std::size_t>(k));
    KMeansResult out;
    out.centers.resize(k, x.cols());
    for (Index j = 0; j < k; ++j) {
        relabel[order[j]] = j;
        out.centers.row(j) = best.centers.row(order[j]);
    }
    out.labels.reserve(best.labels.size());
    for (Index l : best.labels) out.labels.push_back(relabel[l]);
    out.inertia = best.inertia;
    return out;
}

std::vector<double> BranchSummary::shares() const {
    std::vector<double> s(static_cast<std::size_t>(K), 0.0);
    for (Index a : assignment) s[a] += 1.0;
    for (double& v : s) v /= static_cast<double>(std::max<std::size_t>(assignment.size(), 1));
    return s;
}

BranchSummary branch_means(const std::vector<Matrix>& states, Index K, std::uint64_t seed) {
    require(!states.empty(), "branch_means: no trajectory states");
    require(K >= 1, "branch_means: K must be positive");
    const Index n = states.front().rows();
    require(K <= n, "branch_means: K exceeds the trajectory count");
    for (const Matrix& s : states)
        if (s.rows() != n || s.cols() != states.front().cols())
            fail(ErrorCode::ShapeMismatch, "branch_means: inconsistent state shapes");

    BranchSummary b;
    b.K = K;
    b.assignment = kmeans(states.back(), K, seed).labels;
    std::vector<Index> counts(static_cast<std::size_t>(K), 0);
    for (Index a : b.assignment) ++counts[a];
    for (Index c : counts)
        if (c == 0) fail(ErrorCode::Numeric, "branch_means: k-means left a branch empty");
    const Index steps = static_cast<Index>(states.size());
    b.mean_paths.assign(static_cast<std::size_t>(K), Matrix::Zero(steps, states.front().cols()));
    for (Index k = 0; k < steps; ++k)
        for (Index i = 0; i < n; ++i) b.mean_paths[b.assignment[i]].row(k) += states[k].row(i);
    for (Index j = 0; j < K; ++j) b.mean_paths[j] /= static_cast<double>(counts[j]);
    return b;
}

std::vector<double> trajectory_distances(const Matrix& test_points, const BranchSummary& summary) {
    require(test_points.rows() > 0, "trajectory_error: empty test set");
    require(!summary.mean_paths.empty(), "trajectory_error: summary has no branches");
    std::vector<double> out(static_cast<std::size_t>(test_points.rows()));
    for (Index i = 0; i < test_points.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (const Matrix& path : summary.mean_paths) {
            if (path.cols() != test_points.cols())
                fail(ErrorCode::ShapeMismatch, "trajectory_error: dimension mismatch");
            best = std::min(best, (path.rowwise() - test_points.row(i)).rowwise().squaredNorm().minCoeff());
        }
        out[static_cast<std::size_t>(i)] = std::sqrt(best);
    }
    return out;
}

MeanStd trajectory_error(const Matrix& test_points, const BranchSummary& summary) {
    const auto d = trajectory_distances(test_points, summary);
    MeanStd r;
    r.mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
    double ss = 0.0;
    for (double v : d) ss += (v - r.mean) * (v - r.mean);
    r.std = std::sqrt(ss / static_cast<double>(d.size()));
    return r;
}

std::vector<Matrix> straight_line_baseline(const Matrix& start, const Matrix& end, Index steps) {
    require(steps >= 1, "straight_line_baseline: steps must be positive");
    require(start.rows() > 0 && end.rows() > 0, "straight_line_baseline: empty snapshot");
    if (start.cols() != end.cols()) fail(ErrorCode::ShapeMismatch, "straight_line_baseline: dimension mismatch");
    const auto plan = transport::emd(transport::DiscreteMeasure::uniform(start), transport::DiscreteMeasure::uniform(end));
    Matrix target(start.rows(), start.cols());
    for (Index i = 0; i < start.rows(); ++i) {
        Index j = 0;
        plan.plan.row(i).maxCoeff(&j);
        target.row(i) = end.row(j);
    }
    std::vector<Matrix> states;
    for (Index k = 0; k <= steps; ++k) {
        const double s = static_cast<double>(k) / static_cast<double>(steps);
        states.push_back((1.0 - s) * start + s * target);
    }
    return states;
}

}  // namespace cellflow::eval
