#pragma once

#include "cellflow/transport/measure.hpp"

namespace cellflow::transport {

struct W2Loss {
    /// Squared 2-Wasserstein distance.
    double cost = 0.0;
    /// d cost / d support, plan held fixed.
    Matrix grad_points;
    /// Centered source dual potential: gradient along mass-preserving directions.
    Vector grad_weights;
    TransportPlan plan;
};

/// Batches up to this size use the exact solver; larger ones entropic OT with
/// eps = 0.01 * mean(C).
inline constexpr Index kExactTransportLimit = 512;

W2Loss w2_loss(const DiscreteMeasure& pred, const DiscreteMeasure& target);

}  // namespace cellflow::transport
