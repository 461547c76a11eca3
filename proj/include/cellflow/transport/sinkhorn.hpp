#pragma once

#include "cellflow/transport/measure.hpp"

namespace cellflow::transport {

/// Entropic OT on the squared-Euclidean cost. Iterates until the L1 marginal
/// residual falls below tol; otherwise returns with converged = false.
/// Duals are eps*log(u), eps*log(v). Switches to log-domain updates when
/// eps < 1e-2 * max C.
TransportPlan sinkhorn(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double eps, int max_iter = 10000,
                       double tol = 1e-9);
TransportPlan sinkhorn_with_cost(const Vector& a, const Vector& b, const Matrix& cost, double eps,
                                 int max_iter = 10000, double tol = 1e-9);

/// Unbalanced entropic OT: min <pi, C> + lambda_source KL(pi_1 | mu) +
/// lambda_target KL(pi_2 | nu) + eps H(pi), by scaling iterations with
/// exponents lambda / (lambda + eps). Convergence is measured on the change of
/// the scaled duals (f / eps, g / eps) between sweeps.
TransportPlan sinkhorn_unbalanced(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double eps,
                                  double lambda_source, double lambda_target, int max_iter = 10000,
                                  double tol = 1e-9);
TransportPlan sinkhorn_unbalanced_with_cost(const Vector& a, const Vector& b, const Matrix& cost, double eps,
                                            double lambda_source, double lambda_target, int max_iter = 10000,
                                            double tol = 1e-9);

}  // namespace cellflow::transport
