#pragma once

#include "cellflow/numerics/types.hpp"

namespace cellflow {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    Vector first;
    Vector second;
    long step = 0;

    explicit AdamState(Index n = 0) : first(Vector::Zero(n)), second(Vector::Zero(n)) {}
};

/// One bias-corrected Adam update, in place. Throws on non-finite gradients.
void adam_step(Eigen::Ref<Vector> params, const Vector& grads, AdamState& state, const AdamConfig& cfg);

}  // namespace cellflow
