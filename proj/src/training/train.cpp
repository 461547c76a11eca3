#include "cellflow/training/train.hpp"

#include "cellflow/dynamics/integrate.hpp"
#include "cellflow/error.hpp"
#include "cellflow/numerics/adam.hpp"
#include "cellflow/numerics/rng.hpp"
#include "cellflow/numerics/stats.hpp"
#include "cellflow/training/losses.hpp"
#include "cellflow/transport/sinkhorn.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cellflow::training {

using dynamics::DynamicsModel;
using dynamics::TrajectoryBatch;

std::string to_string(TrainMode m) { return m == TrainMode::Local ? "local" : "global"; }

TrainMode train_mode_from_string(const std::string& s) {
    if (s == "local") return TrainMode::Local;
    if (s == "global") return TrainMode::Global;
    fail(ErrorCode::Config, "unknown training mode '" + s + "' (expected local or global)");
}

Index segment_steps(double t0, double t1, Index steps_per_unit) {
    require(steps_per_unit >= 1, "steps_per_unit must be positive");
    return std::max<Index>(1, static_cast<Index>(std::lround((t1 - t0) * static_cast<double>(steps_per_unit))));
}

namespace {

void check_series(const std::vector<Matrix>& z, const std::vector<double>& times) {
    require(z.size() >= 2, "need at least two timepoints");
    require(z.size() == times.size(), "one time value per timepoint");
    for (std::size_t t = 0; t < z.size(); ++t) {
        require(z[t].rows() >= 1, "every timepoint needs cells");
        if (z[t].cols() != z[0].cols()) fail(ErrorCode::ShapeMismatch, "timepoints differ in latent dimension");
        if (!all_finite(z[t])) fail(ErrorCode::Numeric, "non-finite latent coordinates");
        if (t > 0) require(times[t] > times[t - 1], "times must be strictly increasing");
    }
}

Matrix growth_inputs(const std::vector<Matrix>& z, const std::vector<double>& times, std::size_t upto) {
    std::vector<Matrix> parts;
    for (std::size_t t = 0; t < upto; ++t) parts.push_back(dynamics::with_time(z[t], times[t]));
    return vstack(parts);
}

double growth_mse(const Mlp& net, const Matrix& in, const Vector& target) {
    return (net.forward(in).col(0) - target).squaredNorm() / static_cast<double>(target.size());
}

// Per-timepoint sampling without replacement; reshuffles when exhausted.
// Snapshots smaller than the batch size are used whole.
class BatchSampler {
public:
    BatchSampler(const std::vector<Matrix>& z, Index batch, std::uint64_t seed) : rng_(seed, 0x6261746368ULL) {
        for (const Matrix& m : z) {
            sizes_.push_back(m.rows());
            batches_.push_back(std::min(batch, m.rows()));
            orders_.emplace_back();
            cursors_.push_back(m.rows());
        }
    }

    std::vector<Index> next(std::size_t t) {
        const Index b = batches_[t];
        if (cursors_[t] + b > sizes_[t]) {
            const auto p = rng_.permutation(sizes_[t]);
            orders_[t].assign(p.begin(), p.end());
            cursors_[t] = 0;
        }
        std::vector<Index> rows(orders_[t].begin() + cursors_[t], orders_[t].begin() + cursors_[t] + b);
        cursors_[t] += b;
        return rows;
    }

private:
    std::vector<Index> batches_;
    Rng rng_;
    std::vector<Index> sizes_;
    std::vector<std::vector<Index>> orders_;
    std::vector<Index> cursors_;
};

struct Segment {
    Matrix source;
    Vector growth;  // h(source, t_s)
    Vector mass;    // masses attached to the predictions
    Mlp::Tape growth_tape;
    TrajectoryBatch traj;
    MarginalLoss marginal;
    DensityLoss density;
    double energy = 0.0;
};

}  // namespace

GrowthTargets growth_targets(const std::vector<Matrix>& z, const UotParams& uot) {
    require(z.size() >= 2, "growth_targets: need at least two timepoints");
    require(uot.eps > 0.0 && uot.lambda_source > 0.0 && uot.lambda_target > 0.0,
            "growth_targets: UOT parameters must be positive");
    GrowthTargets out;
    for (std::size_t t = 0; t + 1 < z.size(); ++t) {
        const Index n = z[t].rows(), m = z[t + 1].rows();
        const Matrix cost = pairwise_sq_distances(z[t], z[t + 1]);
        const double scale = std::max(cost.mean(), 1e-12);
        const auto plan = transport::sinkhorn_unbalanced_with_cost(
            Vector::Constant(n, 1.0 / static_cast<double>(n)), Vector::Constant(m, 1.0 / static_cast<double>(m)), cost,
            uot.eps * scale, uot.lambda_source * scale, uot.lambda_target * scale, 5000, 1e-7);
        if (!plan.converged)
            fail(ErrorCode::Numeric, "growth_targets: unbalanced OT did not converge between timepoints " +
                                         std::to_string(t) + " and " + std::to_string(t + 1));
        out.masses.push_back(static_cast<double>(n) * plan.source_marginal());
    }
    return out;
}

std::pair<double, double> fit_growth(DynamicsModel& model, const std::vector<Matrix>& z,
                                     const std::vector<double>& times, const GrowthTargets& targets, Index epochs,
                                     double lr) {
    require(targets.masses.size() + 1 == z.size(), "fit_growth: one target vector per source timepoint");
    const Matrix in = growth_inputs(z, times, targets.masses.size());
    Vector target(in.rows());
    Index off = 0;
    for (const Vector& v : targets.masses) {
        target.segment(off, v.size()) = v;
        off += v.size();
    }
    require(off == in.rows(), "fit_growth: target sizes do not match the snapshots");
    if (!all_finite(target) || target.minCoeff() <= 0.0) fail(ErrorCode::Numeric, "fit_growth: invalid growth targets");

    Mlp& net = model.growth;
    const double initial = growth_mse(net, in, target);
    double best = initial;
    Vector best_params = net.parameters();
    AdamConfig opt;
    opt.lr = lr;
    AdamState state(net.parameter_count());
    const double scale = 2.0 / static_cast<double>(target.size());
    for (Index e = 0; e < epochs; ++e) {
        Mlp::Tape tape;
        const Matrix out = net.forward(in, tape);
        const Vector resid = out.col(0) - target;
        Vector grad = Vector::Zero(net.parameter_count());
        net.backward(tape, Matrix(scale * resid), grad);
        adam_step(net.parameters(), grad, state, opt);
        const double mse = growth_mse(net, in, target);
        if (mse < best) {
            best = mse;
            best_params = net.parameters();
        }
    }
    net.set_parameters(best_params);
    return {initial, best};
}

GrowthTargets pretrain_growth(DynamicsModel& model, const std::vector<Matrix>& z, const std::vector<double>& times,
                              const UotParams& uot, Index epochs, double lr) {
    check_series(z, times);
    auto targets = growth_targets(z, uot);
    fit_growth(model, z, times, targets, epochs, lr);
    return targets;
}

ObjectiveGradient objective(const DynamicsModel& model, const std::vector<Matrix>& zb, const std::vector<Matrix>& z,
                            const std::vector<double>& times, const TrainConfig& cfg, double h_margin,
                            std::uint64_t noise_seed) {
    const std::size_t T = zb.size();
    require(T >= 2 && z.size() == T && times.size() == T, "objective: inconsistent timepoint counts");
    for (const Matrix& m : zb) require(m.rows() >= 1, "objective: empty batch");
    Index min_n = z[0].rows();
    for (const Matrix& m : z) min_n = std::min(min_n, m.rows());
    const Index k_density = std::min(cfg.k_density, min_n);
    const bool global = cfg.mode == TrainMode::Global;
    const bool sde = model.mode == dynamics::SolverMode::Sde;
    const Index d = model.latent_dim();

    std::vector<Segment> segs(T - 1);
    ObjectiveGradient out;
    LossParts& parts = out.loss;
    for (std::size_t s = 0; s + 1 < T; ++s) {
        Segment& sg = segs[s];
        sg.source = (!global || s == 0) ? zb[s] : segs[s - 1].traj.states.back();
        if (cfg.growth_enabled) {
            sg.growth = model.growth.forward(dynamics::with_time(sg.source, times[s]), sg.growth_tape).col(0);
            sg.mass = (global && s > 0) ? segs[s - 1].mass.cwiseProduct(sg.growth).eval() : sg.growth;
        } else {
            sg.mass = Vector::Ones(sg.source.rows());
        }
        const Index steps = segment_steps(times[s], times[s + 1], cfg.steps_per_unit);
        sg.traj = dynamics::integrate(model, sg.source, times[s], times[s + 1], steps, derive_seed(noise_seed, {s}));
        const Matrix& pred = sg.traj.states.back();
        if (cfg.lambda_m > 0) sg.marginal = marginal_loss(pred, sg.mass, zb[s + 1]);
        if (cfg.lambda_d > 0) sg.density = density_loss(pred, z[s + 1], k_density, h_margin);
        if (cfg.lambda_e > 0) sg.energy = energy_loss(sg.traj);
        parts.marginal += sg.marginal.value;
        parts.segment_marginal.push_back(sg.marginal.value);
        parts.density += sg.density.value;
        parts.energy += sg.energy;
    }
    parts.total = cfg.lambda_m * parts.marginal + cfg.lambda_e * parts.energy + cfg.lambda_d * parts.density;

    out.drift = Vector::Zero(model.drift.parameter_count());
    out.diffusion = Vector::Zero(model.diffusion.parameter_count());
    out.growth = Vector::Zero(model.growth.parameter_count());
    Matrix carry_state;  // dL/d(prediction of segment s) from later segments
    Vector carry_mass;
    for (std::size_t s = T - 1; s-- > 0;) {
        Segment& sg = segs[s];
        const Index n = sg.source.rows();
        Matrix end_grad = s + 2 < T && global ? carry_state : Matrix::Zero(n, d);
        Vector dmass = s + 2 < T && global ? carry_mass : Vector::Zero(n);
        if (cfg.lambda_m > 0) {
            end_grad += cfg.lambda_m * sg.marginal.grad_points;
            dmass += cfg.lambda_m * sg.marginal.grad_masses;
        }
        if (cfg.lambda_d > 0) end_grad += cfg.lambda_d * sg.density.grad;

        std::vector<Matrix> state_grads(static_cast<std::size_t>(sg.traj.steps() + 1));
        state_grads.back() = end_grad;
        std::vector<Matrix> drift_grads;
        if (cfg.lambda_e > 0) {
            drift_grads = energy_loss_grad(sg.traj);
            for (Matrix& m : drift_grads) m *= cfg.lambda_e;
        }
        const auto g =
            dynamics::backprop_integrate(model, sg.traj, state_grads, cfg.lambda_e > 0 ? &drift_grads : nullptr);
        out.drift += g.drift;
        if (sde) out.diffusion += g.diffusion;

        Matrix source_grad = g.z0;
        carry_mass = Vector::Zero(n);
        if (cfg.growth_enabled) {
            const bool chained = global && s > 0;
            const Vector dh = chained ? dmass.cwiseProduct(segs[s - 1].mass).eval() : dmass;
            if (chained) carry_mass = dmass.cwiseProduct(sg.growth);
            const Matrix gin = model.growth.backward(sg.growth_tape, Matrix(dh), out.growth);
            source_grad += gin.leftCols(d);
        }
        carry_state = source_grad;
    }
    return out;
}

TrainResult train(DynamicsModel model, const std::vector<Matrix>& z, const std::vector<double>& times,
                  const TrainConfig& cfg) {
    check_series(z, times);
    dynamics::validate(model);
    if (z[0].cols() != model.latent_dim())
        fail(ErrorCode::ShapeMismatch, "train: latent dimension " + std::to_string(z[0].cols()) +
                                           " does not match the model (" + std::to_string(model.latent_dim()) + ")");
    require(cfg.lambda_m >= 0 && cfg.lambda_e >= 0 && cfg.lambda_d >= 0, "train: loss weights must be nonnegative");
    require(cfg.lambda_m + cfg.lambda_e + cfg.lambda_d > 0, "train: at least one loss weight must be positive");
    require(cfg.batch_size >= 2, "train: batch_size must be at least 2");
    require(cfg.iterations >= 0 && cfg.lr > 0, "train: invalid iterations or learning rate");
    require(cfg.lr_final > 0 && cfg.lr_final <= 1, "train: lr_final must lie in (0, 1]");

    const std::size_t T = z.size();
    Index min_n = z[0].rows();
    for (const Matrix& m : z) min_n = std::min(min_n, m.rows());
    require(min_n >= 2, "train: every timepoint needs at least two cells");

    TrainResult result;
    result.h_margin = cfg.h_margin ? *cfg.h_margin : 0.1 * median_pairwise_distance(vstack(z), 1000, cfg.seed);
    require(result.h_margin >= 0.0, "train: h_margin must be nonnegative");

    if (cfg.growth_enabled && cfg.pretrain_growth)
        result.growth_targets = pretrain_growth(model, z, times, cfg.uot, cfg.pretrain_epochs, cfg.pretrain_lr);

    const bool sde = model.mode == dynamics::SolverMode::Sde;
    AdamConfig drift_opt, growth_opt;
    drift_opt.lr = cfg.lr;
    growth_opt.lr = cfg.lr * cfg.growth_lr_scale;
    AdamState drift_state(model.drift.parameter_count()), diffusion_state(model.diffusion.parameter_count()),
        growth_state(model.growth.parameter_count());
    BatchSampler sampler(z, cfg.batch_size, cfg.seed);

    for (Index it = 0; it < cfg.iterations; ++it) {
        std::vector<Matrix> zb(T);
        for (std::size_t t = 0; t < T; ++t) zb[t] = take_rows(z[t], sampler.next(t));
        const auto og = objective(model, zb, z, times, cfg, result.h_margin,
                                  derive_seed(cfg.seed, {static_cast<std::uint64_t>(it)}));
        if (!std::isfinite(og.loss.total))
            fail(ErrorCode::Numeric, "train: non-finite loss at iteration " + std::to_string(it + 1));
        result.history.push_back(og.loss);
        const double progress = cfg.iterations > 1 ? static_cast<double>(it) / static_cast<double>(cfg.iterations - 1) : 0.0;
        const double scale = cfg.lr_final + (1.0 - cfg.lr_final) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
        drift_opt.lr = cfg.lr * scale;
        growth_opt.lr = cfg.lr * cfg.growth_lr_scale * scale;
        adam_step(model.drift.parameters(), og.drift, drift_state, drift_opt);
        if (sde) adam_step(model.diffusion.parameters(), og.diffusion, diffusion_state, drift_opt);
        if (cfg.growth_enabled) adam_step(model.growth.parameters(), og.growth, growth_state, growth_opt);
    }
    result.model = std::move(model);
    return result;
}

}  // namespace cellflow::training
