#include "cellflow/transport/emd.hpp"

#include "cellflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cellflow::transport {

namespace {

// Transportation simplex on the complete bipartite graph. Nodes 0..n-1 are
// sources, n..n+m-1 are sinks; the basis is a spanning tree of n+m-1 edges.
// Supplies are perturbed (a_i + d, b_last + n d) so that no pivot is
// degenerate; flows on the optimal tree are recomputed from the unperturbed
// masses at the end, which keeps the same (optimal) duals.
class TransportSimplex {
public:
    TransportSimplex(const Vector& a, const Vector& b, const Matrix& cost)
        : n_(a.size()), m_(b.size()), cost_(cost), a_(a), b_(b) {}

    TransportPlan solve() {
        const Index nodes = n_ + m_;
        cost_scale_ = std::max(1.0, cost_.cwiseAbs().maxCoeff());
        const double total = a_.sum();
        const double delta = std::max(total, 1e-300) * 1e-9 / static_cast<double>(nodes);
        Vector pa = a_.array() + delta;
        Vector pb = b_;
        pb(m_ - 1) += delta * static_cast<double>(n_);

        initial_basis(pa, pb);
        rebuild_tree();

        const Index cells = n_ * m_;
        const Index block = std::max<Index>(10, static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(cells)))));
        const long max_pivots = 1000 + 50L * static_cast<long>(cells);
        const double tol = 1e-12 * cost_scale_;
        Index cursor = 0;
        long pivots = 0;
        bool converged = false;
        while (pivots < max_pivots) {
            Index best_i = -1, best_j = -1;
            double best = -tol;
            Index scanned = 0;
            while (scanned < cells) {
                const Index stop = std::min(cells, scanned + block);
                for (; scanned < stop; ++scanned) {
                    const Index cell = cursor;
                    cursor = (cursor + 1 == cells) ? 0 : cursor + 1;
                    const Index i = cell / m_;
                    const Index j = cell % m_;
                    const double r = cost_(i, j) - pot_[i] - pot_[n_ + j];
                    if (r < best) {
                        best = r;
                        best_i = i;
                        best_j = j;
                    }
                }
                if (best_i >= 0) break;
            }
            if (best_i < 0) {
                converged = true;
                break;
            }
            pivot(best_i, best_j);
            ++pivots;
        }
        if (!converged) fail(ErrorCode::Numeric, "emd: pivot limit reached");

        recompute_flows();
        TransportPlan out;
        out.plan = Matrix::Zero(n_, m_);
        for (std::size_t e = 0; e < row_.size(); ++e) out.plan(row_[e], col_[e]) += flow_[e];
        out.cost = (out.plan.array() * cost_.array()).sum();
        out.dual_f = Eigen::Map<const Vector>(pot_.data(), n_);
        out.dual_g = Eigen::Map<const Vector>(pot_.data() + n_, m_);
        out.residual_source = (out.plan.rowwise().sum() - a_).cwiseAbs().sum();
        out.residual_target = (out.plan.colwise().sum().transpose() - b_).cwiseAbs().sum();
        out.converged = true;
        out.iterations = static_cast<int>(pivots);
        return out;
    }

private:
    void add_edge(Index i, Index j, double f) {
        row_.push_back(i);
        col_.push_back(j);
        flow_.push_back(f);
    }

    // Matrix-minimum allocation (a forest), completed to a spanning tree with
    // zero-flow edges.
    void initial_basis(const Vector& pa, const Vector& pb) {
        const Index cells = n_ * m_;
        std::vector<Index> order(static_cast<std::size_t>(cells));
        std::iota(order.begin(), order.end(), Index{0});
        std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) {
            return cost_(x / m_, x % m_) < cost_(y / m_, y % m_);
        });
        std::vector<double> ra(pa.data(), pa.data() + n_);
        std::vector<double> rb(pb.data(), pb.data() + m_);
        std::vector<Index> uf(static_cast<std::size_t>(n_ + m_));
        std::iota(uf.begin(), uf.end(), Index{0});
        auto find = [&](Index x) {
            while (uf[x] != x) {
                uf[x] = uf[uf[x]];
                x = uf[x];
            }
            return x;
        };
        for (Index cell : order) {
            const Index i = cell / m_;
            const Index j = cell % m_;
            if (ra[i] <= 0.0 || rb[j] <= 0.0) continue;
            double f = 0.0;
            if (ra[i] < rb[j]) {
                f = ra[i];
                rb[j] -= f;
                ra[i] = 0.0;
            } else if (rb[j] < ra[i]) {
                f = rb[j];
                ra[i] -= f;
                rb[j] = 0.0;
            } else {
                f = ra[i];
                ra[i] = rb[j] = 0.0;
            }
            add_edge(i, j, f);
            uf[find(i)] = find(n_ + j);
        }
        const auto target = static_cast<std::size_t>(n_ + m_ - 1);
        for (Index cell : order) {
            if (row_.size() == target) break;
            const Index i = cell / m_;
            const Index j = cell % m_;
            const Index ri = find(i);
            const Index rj = find(n_ + j);
            if (ri == rj) continue;
            add_edge(i, j, 0.0);
            uf[ri] = rj;
        }
        if (row_.size() != target) fail(ErrorCode::Numeric, "emd: failed to build a spanning basis");
    }

    // BFS from node 0: parents, depths and potentials (pot[0] = 0).
    void rebuild_tree() {
        const Index nodes = n_ + m_;
        adj_.assign(static_cast<std::size_t>(nodes), {});
        for (std::size_t e = 0; e < row_.size(); ++e) {
            adj_[row_[e]].push_back(static_cast<Index>(e));
            adj_[n_ + col_[e]].push_back(static_cast<Index>(e));
        }
        refresh_potentials();
    }

    void refresh_potentials() {
        const Index nodes = n_ + m_;
        pot_.assign(static_cast<std::size_t>(nodes), 0.0);
        parent_edge_.assign(static_cast<std::size_t>(nodes), -1);
        depth_.assign(static_cast<std::size_t>(nodes), -1);
        queue_.clear();
        queue_.push_back(0);
        depth_[0] = 0;
        for (std::size_t h = 0; h < queue_.size(); ++h) {
            const Index x = queue_[h];
            for (Index e : adj_[x]) {
                const Index y = other(e, x);
                if (depth_[y] >= 0) continue;
                depth_[y] = depth_[x] + 1;
                parent_edge_[y] = e;
                pot_[y] = cost_(row_[e], col_[e]) - pot_[x];
                queue_.push_back(y);
            }
        }
    }

    Index other(Index e, Index node) const {
        const Index r = row_[e];
        const Index c = n_ + col_[e];
        return node == r ? c : r;
    }

    void pivot(Index i, Index j) {
        Index x = i;
        Index y = n_ + j;
        path_a_.clear();
        path_b_.clear();
        while (depth_[x] > depth_[y]) {
            path_a_.push_back(parent_edge_[x]);
            x = other(parent_edge_[x], x);
        }
        while (depth_[y] > depth_[x]) {
            path_b_.push_back(parent_edge_[y]);
            y = other(parent_edge_[y], y);
        }
        while (x != y) {
            path_a_.push_back(parent_edge_[x]);
            x = other(parent_edge_[x], x);
            path_b_.push_back(parent_edge_[y]);
            y = other(parent_edge_[y], y);
        }
        // Cycle order after the entering edge: path_b forward, then path_a
        // backward; signs alternate starting with minus.
        cycle_.clear();
        for (Index e : path_b_) cycle_.push_back(e);
        for (auto it = path_a_.rbegin(); it != path_a_.rend(); ++it) cycle_.push_back(*it);

        double theta = std::numeric_limits<double>::infinity();
        std::size_t leave = 0;
        for (std::size_t q = 0; q < cycle_.size(); q += 2) {
            const double f = flow_[cycle_[q]];
            if (f < theta) {
                theta = f;
                leave = q;
            }
        }
        for (std::size_t q = 0; q < cycle_.size(); ++q) {
            if (q % 2 == 0)
                flow_[cycle_[q]] -= theta;
            else
                flow_[cycle_[q]] += theta;
        }
        const Index e = cycle_[leave];
        auto drop = [&](Index node) {
            auto& list = adj_[node];
            list.erase(std::find(list.begin(), list.end(), e));
        };
        drop(row_[e]);
        drop(n_ + col_[e]);
        row_[e] = i;
        col_[e] = j;
        flow_[e] = theta;
        adj_[i].push_back(e);
        adj_[n_ + j].push_back(e);
        refresh_potentials();
    }

    // Leaf elimination on the final tree with the original masses.
    void recompute_flows() {
        const Index nodes = n_ + m_;
        std::vector<double> rem(static_cast<std::size_t>(nodes));
        for (Index i = 0; i < n_; ++i) rem[i] = a_(i);
        for (Index j = 0; j < m_; ++j) rem[n_ + j] = b_(j);
        std::vector<Index> degree(static_cast<std::size_t>(nodes));
        for (Index v = 0; v < nodes; ++v) degree[v] = static_cast<Index>(adj_[v].size());
        std::vector<char> edge_done(row_.size(), 0);
        std::vector<Index> stack;
        for (Index v = 0; v < nodes; ++v)
            if (degree[v] == 1) stack.push_back(v);
        while (!stack.empty()) {
            const Index leaf = stack.back();
            stack.pop_back();
            if (degree[leaf] != 1) continue;
            Index edge = -1;
            for (Index e : adj_[leaf])
                if (!edge_done[e]) edge = e;
            const Index nb = other(edge, leaf);
            const double f = std::max(0.0, rem[leaf]);
            flow_[edge] = f;
            edge_done[edge] = 1;
            rem[nb] -= f;
            rem[leaf] = 0.0;
            degree[leaf] = 0;
            if (--degree[nb] == 1) stack.push_back(nb);
        }
    }

    Index n_, m_;
    const Matrix& cost_;
    Vector a_, b_;
    double cost_scale_ = 1.0;
    std::vector<Index> row_, col_;
    std::vector<double> flow_;
    std::vector<std::vector<Index>> adj_;
    std::vector<double> pot_;
    std::vector<Index> parent_edge_, depth_, queue_;
    std::vector<Index> path_a_, path_b_, cycle_;
};

}  // namespace

TransportPlan emd_with_cost(const Vector& a, const Vector& b, const Matrix& cost) {
    if (a.size() == 0 || b.size() == 0) fail(ErrorCode::InvalidArgument, "emd: empty measure");
    if (cost.rows() != a.size() || cost.cols() != b.size()) fail(ErrorCode::ShapeMismatch, "emd: cost shape mismatch");
    if ((a.array() < 0.0).any() || (b.array() < 0.0).any()) fail(ErrorCode::InvalidArgument, "emd: negative weight");
    if (!a.allFinite() || !b.allFinite() || !cost.allFinite()) fail(ErrorCode::Numeric, "emd: non-finite input");
    const double sa = a.sum();
    const double sb = b.sum();
    if (std::fabs(sa - sb) > 1e-9 * std::max(1.0, sa)) fail(ErrorCode::InvalidArgument, "emd: unbalanced masses");
    if (sa <= 0.0) fail(ErrorCode::InvalidArgument, "emd: zero total mass");
    const Vector bb = b * (sa / sb);
    TransportSimplex solver(a, bb, cost);
    TransportPlan plan = solver.solve();
    plan.residual_target = (plan.plan.colwise().sum().transpose() - b).cwiseAbs().sum();
    return plan;
}

TransportPlan emd(const DiscreteMeasure& mu, const DiscreteMeasure& nu, int p) {
    if (mu.size() == 0 || nu.size() == 0) fail(ErrorCode::InvalidArgument, "emd: empty measure");
    if (mu.dim() != nu.dim()) fail(ErrorCode::ShapeMismatch, "emd: dimension mismatch");
    return emd_with_cost(mu.weights, nu.weights, ground_cost(mu.support, nu.support, p));
}

}  // namespace cellflow::transport
