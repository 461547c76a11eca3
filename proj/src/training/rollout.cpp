#include "cellflow/training/rollout.hpp"

#include "cellflow/dynamics/integrate.hpp"
#include "cellflow/error.hpp"
#include "cellflow/numerics/rng.hpp"
#include "cellflow/training/train.hpp"

namespace cellflow::training {

Matrix Rollout::path(Index cell) const {
    require(cell >= 0 && cell < cells(), "rollout path: cell out of range");
    Matrix p(static_cast<Index>(states.size()), states.front().cols());
    for (std::size_t k = 0; k < states.size(); ++k) p.row(static_cast<Index>(k)) = states[k].row(cell);
    return p;
}

Rollout rollout(const dynamics::DynamicsModel& model, const Matrix& z0, const std::vector<double>& times,
                Index steps_per_unit, bool use_growth, std::uint64_t noise_seed) {
    require(!times.empty(), "rollout: need at least one timepoint");
    for (std::size_t i = 1; i < times.size(); ++i) require(times[i] > times[i - 1], "rollout: times must increase");
    if (z0.cols() != model.latent_dim())
        fail(ErrorCode::ShapeMismatch, "rollout: start states have " + std::to_string(z0.cols()) +
                                           " columns, model expects " + std::to_string(model.latent_dim()));
    Rollout r;
    Vector mass = Vector::Ones(z0.rows());
    r.states.push_back(z0);
    r.times.push_back(times[0]);
    r.masses.push_back(mass);
    r.checkpoints.push_back(0);
    for (std::size_t s = 0; s + 1 < times.size(); ++s) {
        const Matrix& source = r.states.back();
        if (use_growth) mass = mass.cwiseProduct(dynamics::eval_growth_batch(model, source, times[s]));
        const Index steps = segment_steps(times[s], times[s + 1], steps_per_unit);
        auto seg = dynamics::integrate(model, source, times[s], times[s + 1], steps, derive_seed(noise_seed, {s}));
        for (Index k = 1; k <= steps; ++k) {
            r.states.push_back(std::move(seg.states[static_cast<std::size_t>(k)]));
            r.times.push_back(seg.times[static_cast<std::size_t>(k)]);
            r.masses.push_back(mass);
        }
        r.checkpoints.push_back(static_cast<Index>(r.states.size()) - 1);
    }
    return r;
}

}  // namespace cellflow::training
