#include "cellflow/spatial/features.hpp"

#include "cellflow/error.hpp"
#include "cellflow/numerics/knn.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace cellflow::spatial {

CellGraph build_cell_graph(const Matrix& locations, Index k, std::optional<double> max_dist, Index hops) {
    require(k >= 1, "build_cell_graph: k must be positive");
    require(hops >= 1, "build_cell_graph: hops must be positive");
    if (!all_finite(locations)) fail(ErrorCode::Numeric, "build_cell_graph: non-finite locations");
    const Index n = locations.rows();
    CellGraph g;
    g.neighborhoods.assign(static_cast<std::size_t>(n), {});
    g.isolated.assign(static_cast<std::size_t>(n), false);
    if (n == 0) return g;

    std::vector<std::set<Index>> adj(static_cast<std::size_t>(n));
    if (n > 1) {
        const auto knn = knn_query(locations, std::min(k, n - 1), max_dist);
        for (Index i = 0; i < n; ++i)
            for (Index j : knn[i]) {
                adj[i].insert(j);
                adj[j].insert(i);
            }
    }

    std::vector<Index> depth(static_cast<std::size_t>(n), -1);
    for (Index c = 0; c < n; ++c) {
        std::vector<Index> frontier{c}, seen{c};
        depth[c] = 0;
        for (Index h = 0; h < hops && !frontier.empty(); ++h) {
            std::vector<Index> next;
            for (Index u : frontier)
                for (Index v : adj[u])
                    if (depth[v] < 0) {
                        depth[v] = h + 1;
                        next.push_back(v);
                        seen.push_back(v);
                    }
            frontier = std::move(next);
        }
        auto& nb = g.neighborhoods[c];
        for (Index v : seen)
            if (v != c) nb.push_back(v);
        std::sort(nb.begin(), nb.end());
        for (Index v : seen) depth[v] = -1;
        if (nb.empty()) {
            g.isolated[c] = true;
            nb.push_back(c);
        }
    }
    return g;
}

Vector celltype_frequencies(const std::vector<Index>& neighbors, const std::vector<Index>& cell_types, Index n_types) {
    require(!neighbors.empty(), "celltype_frequencies: empty neighborhood");
    Vector f = Vector::Zero(n_types);
    for (Index c : neighbors) {
        const Index t = cell_types.at(static_cast<std::size_t>(c));
        require(t >= 0 && t < n_types, "celltype_frequencies: cell type out of range");
        f(t) += 1.0;
    }
    return f / static_cast<double>(neighbors.size());
}

Vector lr_potentials(const Matrix& expression, Index cell, const std::vector<Index>& neighbors,
                     const std::vector<std::pair<Index, Index>>& lr_pairs) {
    require(!neighbors.empty(), "lr_potentials: empty neighborhood");
    Vector a = Vector::Zero(static_cast<Index>(lr_pairs.size()));
    for (std::size_t p = 0; p < lr_pairs.size(); ++p) {
        const auto [lig, rec] = lr_pairs[p];
        require(lig >= 0 && lig < expression.cols() && rec >= 0 && rec < expression.cols(),
                "lr_potentials: gene index out of range");
        double s = 0.0;
        for (Index c : neighbors) s += expression(c, lig) * expression(cell, rec);
        a(static_cast<Index>(p)) = s / static_cast<double>(neighbors.size());
    }
    return a;
}

Vector local_niche(const Matrix& embedding, const std::vector<Index>& neighbors) {
    require(!neighbors.empty(), "local_niche: empty neighborhood");
    Vector m = Vector::Zero(embedding.cols());
    for (Index c : neighbors) m += embedding.row(c).transpose();
    return m / static_cast<double>(neighbors.size());
}

Matrix zscore_columns(const Matrix& m) {
    Matrix out = m.rowwise() - m.colwise().mean();
    const double n = static_cast<double>(std::max<Index>(1, m.rows()));
    for (Index j = 0; j < m.cols(); ++j) {
        const double sd = std::sqrt(out.col(j).squaredNorm() / n);
        if (sd > 1e-12) out.col(j) /= sd;
        else out.col(j).setZero();
    }
    return out;
}

SpatialFeatures assemble_spatial_features(const SpatialDataset& data, const SpatialConfig& cfg) {
    const Index n = data.expression.rows();
    if (data.locations.rows() != n || static_cast<Index>(data.cell_types.size()) != n)
        fail(ErrorCode::ShapeMismatch, "spatial: expression, locations and cell types disagree on cell count");
    require(data.locations.cols() == 2, "spatial: locations need two columns");
    require(data.n_types >= 1, "spatial: need at least one cell type");
    if (!all_finite(data.expression)) fail(ErrorCode::Numeric, "spatial: non-finite expression");

    const CellGraph graph = build_cell_graph(data.locations, cfg.k, cfg.max_dist, cfg.hops);
    const PcaModel expr_pca = pca_fit(data.expression, cfg.expression_pca_dim);
    const Matrix embedding = expr_pca.transform(data.expression);

    const Index m = data.n_types, q = embedding.cols(), p = static_cast<Index>(data.lr_pairs.size());
    Matrix h(n, m), niche(n, q), a(n, p);
    for (Index c = 0; c < n; ++c) {
        const auto& nb = graph.neighborhoods[c];
        h.row(c) = celltype_frequencies(nb, data.cell_types, m).transpose();
        niche.row(c) = local_niche(embedding, nb).transpose();
        if (p > 0) a.row(c) = lr_potentials(data.expression, c, nb, data.lr_pairs).transpose();
    }

    SpatialFeatures out;
    out.raw.resize(n, m + q + p);
    out.raw << h, niche, a;
    out.block_spans = {{"celltype_freq", 0, m}, {"niche", m, m + q}, {"lr_potential", m + q, m + q + p}};
    const Matrix normalized = (Matrix(n, m + q + p) << zscore_columns(h), zscore_columns(niche), zscore_columns(a))
                                  .finished();
    if (cfg.output_dim > normalized.cols())
        fail(ErrorCode::Config, "spatial: output_dim " + std::to_string(cfg.output_dim) +
                                    " exceeds the concatenated feature width " + std::to_string(normalized.cols()));
    out.pca = pca_fit(normalized, cfg.output_dim);
    out.S = out.pca.transform(normalized);
    out.isolated = graph.isolated;
    return out;
}

Matrix joint_embed(const Matrix& gene_latent, const Matrix& spatial_latent, double s) {
    if (gene_latent.rows() != spatial_latent.rows())
        fail(ErrorCode::ShapeMismatch, "joint_embed: gene and spatial latents have different row counts");
    require(s >= 0.0, "joint_embed: scale must be nonnegative");
    auto mean_std = [](const Matrix& m) {
        const Matrix c = m.rowwise() - m.colwise().mean();
        double total = 0.0;
        for (Index j = 0; j < m.cols(); ++j) total += std::sqrt(c.col(j).squaredNorm() / static_cast<double>(m.rows()));
        return m.cols() > 0 ? total / static_cast<double>(m.cols()) : 0.0;
    };
    const double g = mean_std(gene_latent);
    const double sp = mean_std(spatial_latent);
    Matrix spatial = spatial_latent.rowwise() - spatial_latent.colwise().mean();
    if (sp > 1e-12 && s > 0.0) spatial *= s * g / sp;
    else spatial.setZero();
    Matrix out(gene_latent.rows(), gene_latent.cols() + spatial.cols());
    out << gene_latent, spatial;
    return out;
}

}  // namespace cellflow::spatial
