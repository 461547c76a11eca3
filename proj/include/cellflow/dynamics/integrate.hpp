#pragma once

#include "cellflow/dynamics/model.hpp"

#include <cstdint>
#include <vector>

namespace cellflow::dynamics {

/// Fixed-step rollout with everything needed for the reverse pass.
struct TrajectoryBatch {
    /// steps + 1 entries, each cells x d.
    std::vector<Matrix> states;
    /// Grid times, steps + 1 entries.
    std::vector<double> times;
    /// Per-cell mass weights.
    Vector masses;
    /// f(z_k, t_k) for k < steps (drift before momentum blending).
    std::vector<Matrix> drift_evals;
    /// Momentum v_k for k < steps.
    std::vector<Matrix> momentum;
    /// Standard normal draws per step (sde mode only).
    std::vector<Matrix> noise;
    double step = 0.0;
    SolverMode mode = SolverMode::Ode;
    OdeScheme scheme = OdeScheme::Euler;

    Index cells() const { return states.empty() ? 0 : states.front().rows(); }
    Index steps() const { return static_cast<Index>(states.size()) - 1; }
    /// steps + 1 x d path of one cell.
    Matrix path(Index cell) const;
};

/// Integrates z0 from t0 to t1 in n_steps uniform steps. In sde mode the
/// noise for cell i comes from Rng(noise_seed, i), so cells are independent
/// of batch composition. Masses start at 1.
TrajectoryBatch integrate(const DynamicsModel& m, const Matrix& z0, double t0, double t1, Index n_steps,
                          std::uint64_t noise_seed = 0);

struct DynamicsGradient {
    Vector drift;
    Vector diffusion;
    /// Gradient with respect to the initial states.
    Matrix z0;
};

/// Exact reverse pass of the discrete rollout. `state_grads[k]` is dL/dz_k
/// (an empty matrix means zero); `drift_eval_grads[k]`, when given, is
/// dL/df_k for losses on the stored drift evaluations. Noise is reused as
/// recorded.
DynamicsGradient backprop_integrate(const DynamicsModel& m, const TrajectoryBatch& batch,
                                    const std::vector<Matrix>& state_grads,
                                    const std::vector<Matrix>* drift_eval_grads = nullptr);

}  // namespace cellflow::dynamics
