#pragma once

#include "cellflow/numerics/pca.hpp"
#include "cellflow/numerics/types.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cellflow::spatial {

struct SpatialDataset {
    /// cells x genes
    Matrix expression;
    /// cells x 2
    Matrix locations;
    /// Per-cell type in [0, n_types).
    std::vector<Index> cell_types;
    Index n_types = 0;
    /// (ligand gene column, receptor gene column)
    std::vector<std::pair<Index, Index>> lr_pairs;
};

struct CellGraph {
    /// Cells within `hops` hops, self excluded. Isolated cells list themselves.
    NeighborLists neighborhoods;
    /// True where the graph gave no neighbors and the cell fell back to itself.
    std::vector<bool> isolated;
};

/// Undirected union of kNN edges (dropping edges longer than max_dist),
/// expanded to all nodes within `hops` hops.
CellGraph build_cell_graph(const Matrix& locations, Index k, std::optional<double> max_dist, Index hops);

/// Fraction of each type among the neighbors.
Vector celltype_frequencies(const std::vector<Index>& neighbors, const std::vector<Index>& cell_types, Index n_types);

/// Per pair: mean over neighbors c' of ligand(c') * receptor(cell).
Vector lr_potentials(const Matrix& expression, Index cell, const std::vector<Index>& neighbors,
                     const std::vector<std::pair<Index, Index>>& lr_pairs);

/// Mean of the neighbors' rows of `embedding`.
Vector local_niche(const Matrix& embedding, const std::vector<Index>& neighbors);

struct SpatialConfig {
    Index k = 5;
    Index hops = 3;
    std::optional<double> max_dist;
    /// Expression PCA dimension used for the niche block.
    Index expression_pca_dim = 10;
    /// Output dimension after the final PCA.
    Index output_dim = 10;
};

struct BlockSpan {
    std::string name;
    Index begin = 0;
    Index end = 0;
};

struct SpatialFeatures {
    /// cells x output_dim
    Matrix S;
    /// Concatenated [celltype_freq | niche | lr_potential] before normalization.
    Matrix raw;
    std::vector<BlockSpan> block_spans;
    PcaModel pca;
    std::vector<bool> isolated;
};

SpatialFeatures assemble_spatial_features(const SpatialDataset& data, const SpatialConfig& cfg);

/// Column z-score; zero-variance columns become zeros.
Matrix zscore_columns(const Matrix& m);

/// [gene | spatial'] where spatial' is the centered spatial block rescaled so
/// its mean column std is `s` times the gene block's.
Matrix joint_embed(const Matrix& gene_latent, const Matrix& spatial_latent, double s);

}  // namespace cellflow::spatial
