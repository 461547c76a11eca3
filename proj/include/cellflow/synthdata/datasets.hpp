#pragma once

#include "cellflow/numerics/rng.hpp"
#include "cellflow/numerics/types.hpp"
#include "cellflow/synthdata/grn.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cellflow::synthdata {

struct SyntheticDataset {
    /// cells x features
    Matrix expression;
    std::vector<Index> timepoint;
    /// Lineage (GRN data) or mixture branch (toy data).
    std::vector<Index> branch;
    /// Nearest cell state along the lineage; equals branch for toy data.
    std::vector<Index> state;
    /// Ground-truth time. Lineage progress in [0, 1] for GRN data.
    std::vector<double> time;
    Index n_timepoints = 0;
    Index n_branches = 0;

    Index cells() const { return expression.rows(); }
};

/// Rows of each timepoint, in order.
std::vector<Matrix> snapshots(const SyntheticDataset& ds);
std::vector<std::vector<Index>> snapshot_rows(const SyntheticDataset& ds);
SyntheticDataset subset(const SyntheticDataset& ds, const std::vector<Index>& rows);

struct LineageOptions {
    Index cells = 500;
    /// Steps per state transition.
    Index steps = 200;
    /// Progress is binned into this many timepoints.
    Index timepoints = 5;
};

/// Each cell picks lineage (cell mod lineages), draws progress uniformly in
/// [0, 1], burns in at the root program and then integrates while the master
/// regulator programs interpolate linearly along the lineage.
SyntheticDataset simulate_lineages(const GrnSpec& spec, const LineageOptions& opt, std::uint64_t seed);

struct TechnicalNoise {
    double library_lo = 1.0;
    double library_hi = 1.0;
    double dropout = 0.0;
    bool poisson = false;
};
Matrix technical_noise(const Matrix& expr, const TechnicalNoise& noise, Rng& rng);

enum class ToyKind { Branching, Dying, Growing, Arc };
ToyKind toy_kind_from_string(const std::string& s);
std::string to_string(ToyKind k);

/// 2-D Gaussian mixtures over T timepoints, n cells at t = 0.
///  branching: one cluster at the origin splits into means (t, +-0.8t).
///  dying: branches at (t, +-(0.6 + 0.4t)); branch 1 shrinks to 20% by the end.
///  growing: same means; branch 0 share goes 0.2 -> 0.6 geometrically.
///  arc: one cluster moving along a half circle of radius 2.
SyntheticDataset toy_set(ToyKind kind, Index n, Index T, std::uint64_t seed);

/// Cells of branch b at timepoint t.
std::vector<std::vector<Index>> branch_counts(const SyntheticDataset& ds);

/// 1 progenitor -> 3 fates, 100 genes.
GrnSpec trifurcation_spec(std::uint64_t seed);
/// 500 cells over 5 timepoints.
SyntheticDataset trifurcation(std::uint64_t seed);

/// Cycle A -> B -> C -> A, then A -> D or A -> E, 1000 genes.
GrnSpec s_shape_spec(std::uint64_t seed);
struct SShapeOptions {
    Index simulated_cells = 990;
    Index kept_cells = 315;
    Index steps = 50;
    Index timepoints = 5;
};
SyntheticDataset s_shape(std::uint64_t seed, const SShapeOptions& opt = {});

}  // namespace cellflow::synthdata
