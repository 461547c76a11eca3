#pragma once

#include "cellflow/transport/measure.hpp"

namespace cellflow::transport {

/// Exact optimal transport by the transportation (network) simplex.
///
/// Returns the minimizer of sum pi_ij d(x_i, y_j)^p over couplings of mu and
/// nu; cost^(1/p) is the Wasserstein-p distance. Duals satisfy
/// f_i + g_j <= C_ij with equality on the basis tree, f_0 = 0.
TransportPlan emd(const DiscreteMeasure& mu, const DiscreteMeasure& nu, int p = 2);

/// Same solver on an explicit cost matrix (n x m).
TransportPlan emd_with_cost(const Vector& a, const Vector& b, const Matrix& cost);

}  // namespace cellflow::transport
