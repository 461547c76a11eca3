#include "cellflow/synthdata/datasets.hpp"

#include "cellflow/error.hpp"
#include "cellflow/numerics/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cellflow::synthdata {

std::vector<std::vector<Index>> snapshot_rows(const SyntheticDataset& ds) {
    std::vector<std::vector<Index>> rows(static_cast<std::size_t>(ds.n_timepoints));
    for (Index i = 0; i < ds.cells(); ++i) {
        const Index t = ds.timepoint[i];
        require(t >= 0 && t < ds.n_timepoints, "snapshots: timepoint label out of range");
        rows[t].push_back(i);
    }
    return rows;
}

std::vector<Matrix> snapshots(const SyntheticDataset& ds) {
    std::vector<Matrix> out;
    for (const auto& rows : snapshot_rows(ds)) out.push_back(take_rows(ds.expression, rows));
    return out;
}

SyntheticDataset subset(const SyntheticDataset& ds, const std::vector<Index>& rows) {
    SyntheticDataset out;
    out.expression = take_rows(ds.expression, rows);
    out.n_timepoints = ds.n_timepoints;
    out.n_branches = ds.n_branches;
    for (Index r : rows) {
        out.timepoint.push_back(ds.timepoint[r]);
        out.branch.push_back(ds.branch[r]);
        out.state.push_back(ds.state[r]);
        out.time.push_back(ds.time[r]);
    }
    return out;
}

SyntheticDataset simulate_lineages(const GrnSpec& spec, const LineageOptions& opt, std::uint64_t seed) {
    validate(spec);
    require(opt.cells >= 1 && opt.steps >= 1 && opt.timepoints >= 1, "simulate_lineages: cells, steps, timepoints must be positive");
    const auto lineages = resolve_lineages(spec);
    const Index n = opt.cells, g = spec.genes;

    const Vector root_basal = basal_for_program(spec, spec.programs.row(spec.root).transpose());
    const Vector start = steady_state(spec, root_basal);

    SyntheticDataset ds;
    ds.expression.resize(n, g);
    ds.timepoint.assign(static_cast<std::size_t>(n), 0);
    ds.branch.assign(static_cast<std::size_t>(n), 0);
    ds.state.assign(static_cast<std::size_t>(n), 0);
    ds.time.assign(static_cast<std::size_t>(n), 0.0);
    ds.n_timepoints = opt.timepoints;
    ds.n_branches = static_cast<Index>(lineages.size());

    const Rng base(seed);
    parallel_for(n, [&](std::ptrdiff_t c) {
        Rng rng = base.substream(static_cast<std::uint64_t>(c));
        const Index lin_id = static_cast<Index>(c) % static_cast<Index>(lineages.size());
        const auto& lin = lineages[lin_id];
        const Index legs = static_cast<Index>(lin.size()) - 1;
        const double tau = rng.uniform();
        const Index total = static_cast<Index>(std::llround(tau * static_cast<double>(legs * opt.steps)));

        GrnStepper stepper(spec);
        Vector x = start, basal = root_basal;
        for (Index s = 0; s < spec.burn_in; ++s) stepper.step(basal, x, spec.dt, rng);
        for (Index s = 0; s < total; ++s) {
            const Index leg = std::min(s / opt.steps, legs - 1);
            const double frac = static_cast<double>(s - leg * opt.steps) / static_cast<double>(opt.steps);
            for (std::size_t m = 0; m < spec.master_regulators.size(); ++m)
                basal[spec.master_regulators[m]] = (1.0 - frac) * spec.programs(lin[leg], static_cast<Index>(m)) +
                                                   frac * spec.programs(lin[leg + 1], static_cast<Index>(m));
            stepper.step(basal, x, spec.dt, rng);
        }

        ds.expression.row(c) = x.transpose();
        ds.branch[c] = lin_id;
        ds.time[c] = tau;
        ds.timepoint[c] = std::min(static_cast<Index>(tau * static_cast<double>(opt.timepoints)), opt.timepoints - 1);
        ds.state[c] = lin[static_cast<std::size_t>(std::llround(tau * static_cast<double>(legs)))];
    });
    return ds;
}

Matrix technical_noise(const Matrix& expr, const TechnicalNoise& noise, Rng& rng) {
    require(noise.dropout >= 0.0 && noise.dropout <= 1.0, "technical_noise: dropout must lie in [0, 1]");
    require(noise.library_lo > 0.0 && noise.library_lo <= noise.library_hi, "technical_noise: need 0 < library_lo <= library_hi");
    Matrix out(expr.rows(), expr.cols());
    const double llo = std::log(noise.library_lo), lhi = std::log(noise.library_hi);
    const Rng base = rng.substream(rng.next_u64());
    for (Index c = 0; c < expr.rows(); ++c) {
        Rng cell = base.substream(static_cast<std::uint64_t>(c));
        const double factor = noise.library_lo == noise.library_hi ? noise.library_lo : std::exp(cell.uniform(llo, lhi));
        for (Index j = 0; j < expr.cols(); ++j) {
            const double v = factor * std::max(expr(c, j), 0.0);
            if (cell.bernoulli(noise.dropout))
                out(c, j) = 0.0;
            else
                out(c, j) = noise.poisson ? static_cast<double>(cell.poisson(v)) : v;
        }
    }
    return out;
}

ToyKind toy_kind_from_string(const std::string& s) {
    if (s == "branching") return ToyKind::Branching;
    if (s == "dying") return ToyKind::Dying;
    if (s == "growing") return ToyKind::Growing;
    if (s == "arc") return ToyKind::Arc;
    fail(ErrorCode::Config, "unknown toy set '" + s + "' (expected branching, dying, growing or arc)");
}

std::string to_string(ToyKind k) {
    switch (k) {
        case ToyKind::Branching: return "branching";
        case ToyKind::Dying: return "dying";
        case ToyKind::Growing: return "growing";
        case ToyKind::Arc: return "arc";
    }
    return "arc";
}

SyntheticDataset toy_set(ToyKind kind, Index n, Index T, std::uint64_t seed) {
    require(T >= 2, "toy_set: need at least two timepoints");
    require(n >= 2, "toy_set: need at least two cells per timepoint");
    const double last = static_cast<double>(T - 1);
    const Rng base(seed);

    SyntheticDataset ds;
    ds.n_timepoints = T;
    ds.n_branches = kind == ToyKind::Arc ? 1 : 2;
    std::vector<RowVector> rows;

    for (Index t = 0; t < T; ++t) {
        Rng rng = base.substream(static_cast<std::uint64_t>(t));
        const double tt = static_cast<double>(t), frac = tt / last;
        Index count[2] = {0, 0};
        RowVector mean[2] = {RowVector::Zero(2), RowVector::Zero(2)};
        double spread = 0.15;
        switch (kind) {
            case ToyKind::Branching:
                count[0] = (n + 1) / 2;
                count[1] = n / 2;
                mean[0] << tt, 0.8 * tt;
                mean[1] << tt, -0.8 * tt;
                break;
            case ToyKind::Dying:
                count[0] = (n + 1) / 2;
                count[1] = static_cast<Index>(std::llround(0.5 * static_cast<double>(n) * (1.0 - 0.8 * frac)));
                mean[0] << tt, 0.6 + 0.4 * tt;
                mean[1] << tt, -0.6 - 0.4 * tt;
                break;
            case ToyKind::Growing:
                count[0] = static_cast<Index>(std::llround(0.2 * static_cast<double>(n) * std::pow(6.0, frac)));
                count[1] = static_cast<Index>(std::llround(0.8 * static_cast<double>(n)));
                mean[0] << tt, 0.6 + 0.4 * tt;
                mean[1] << tt, -0.6 - 0.4 * tt;
                break;
            case ToyKind::Arc: {
                const double theta = std::numbers::pi * frac;
                count[0] = n;
                mean[0] << 2.0 * std::cos(theta), 2.0 * std::sin(theta);
                spread = 0.1;
                break;
            }
        }
        for (Index b = 0; b < 2; ++b)
            for (Index i = 0; i < count[b]; ++i) {
                RowVector p(2);
                p << mean[b][0] + spread * rng.normal(), mean[b][1] + spread * rng.normal();
                rows.push_back(p);
                ds.timepoint.push_back(t);
                ds.branch.push_back(b);
                ds.state.push_back(b);
                ds.time.push_back(tt);
            }
    }
    ds.expression.resize(static_cast<Index>(rows.size()), 2);
    for (std::size_t i = 0; i < rows.size(); ++i) ds.expression.row(static_cast<Index>(i)) = rows[i];
    return ds;
}

std::vector<std::vector<Index>> branch_counts(const SyntheticDataset& ds) {
    std::vector<std::vector<Index>> counts(static_cast<std::size_t>(ds.n_timepoints),
                                           std::vector<Index>(static_cast<std::size_t>(ds.n_branches), 0));
    for (Index i = 0; i < ds.cells(); ++i) ++counts[ds.timepoint[i]][ds.branch[i]];
    return counts;
}

namespace {

// Each state lights up its own group(s) of master regulators.
Matrix group_programs(Index groups, Index per_group, const std::vector<std::vector<Index>>& active, double base,
                      double high) {
    Matrix p = Matrix::Constant(static_cast<Index>(active.size()), groups * per_group, base);
    for (std::size_t s = 0; s < active.size(); ++s)
        for (Index grp : active[s]) p.row(static_cast<Index>(s)).segment(grp * per_group, per_group).setConstant(high);
    return p;
}

}  // namespace

GrnSpec trifurcation_spec(std::uint64_t seed) {
    // progenitor: all groups moderate; fate f: group f high, the rest low
    Matrix programs = group_programs(3, 3, {{}, {0}, {1}, {2}}, 0.3, 4.0);
    programs.row(0).setConstant(1.5);
    RandomGrnOptions opt;
    opt.genes = 100;
    opt.master_regulators = 9;
    GrnSpec spec = random_grn(opt, programs, seed);
    spec.transitions = {{0, 1}, {0, 2}, {0, 3}};
    return spec;
}

SyntheticDataset trifurcation(std::uint64_t seed) {
    LineageOptions opt;
    opt.cells = 500;
    opt.steps = 200;
    opt.timepoints = 5;
    return simulate_lineages(trifurcation_spec(seed), opt, derive_seed(seed, {1}));
}

GrnSpec s_shape_spec(std::uint64_t seed) {
    // A, B, C form the cycle; D and E are the two fates leaving A
    const Matrix programs = group_programs(4, 3, {{0}, {1}, {2}, {0, 3}, {3}}, 0.3, 4.0);
    RandomGrnOptions opt;
    opt.genes = 1000;
    opt.master_regulators = 12;
    GrnSpec spec = random_grn(opt, programs, seed);
    spec.transitions = {{0, 1}, {1, 2}, {2, 0}, {0, 3}, {0, 4}};
    spec.lineages = {{0, 1, 2, 0, 3}, {0, 1, 2, 0, 4}};
    spec.dt = 0.1;
    spec.burn_in = 40;
    return spec;
}

SyntheticDataset s_shape(std::uint64_t seed, const SShapeOptions& opt) {
    require(opt.kept_cells >= 1 && opt.kept_cells <= opt.simulated_cells, "s_shape: need 1 <= kept_cells <= simulated_cells");
    LineageOptions lo;
    lo.cells = opt.simulated_cells;
    lo.steps = opt.steps;
    lo.timepoints = opt.timepoints;
    const SyntheticDataset full = simulate_lineages(s_shape_spec(seed), lo, derive_seed(seed, {1}));

    Rng rng(derive_seed(seed, {2}));
    auto perm = rng.permutation(opt.simulated_cells);
    std::vector<Index> keep(perm.begin(), perm.begin() + opt.kept_cells);
    std::sort(keep.begin(), keep.end());
    return subset(full, keep);
}

}  // namespace cellflow::synthdata
