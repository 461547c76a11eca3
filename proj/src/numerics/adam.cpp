#include "cellflow/numerics/adam.hpp"

#include "cellflow/error.hpp"

#include <cmath>

namespace cellflow {

void adam_step(Eigen::Ref<Vector> params, const Vector& grads, AdamState& state, const AdamConfig& cfg) {
    if (params.size() != grads.size() || state.first.size() != grads.size())
        fail(ErrorCode::ShapeMismatch, "adam_step: size mismatch");
    require(cfg.lr > 0.0, "adam_step: learning rate must be positive");
    if (!grads.allFinite()) fail(ErrorCode::Numeric, "adam_step: non-finite gradient");

    ++state.step;
    state.first = cfg.beta1 * state.first + (1.0 - cfg.beta1) * grads;
    state.second = cfg.beta2 * state.second + (1.0 - cfg.beta2) * grads.cwiseAbs2();
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    params.array() -= cfg.lr * (state.first.array() / c1) / ((state.second.array() / c2).sqrt() + cfg.eps);
}

}  // namespace cellflow
