#pragma once

#include "cellflow/numerics/mlp.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cellflow::dynamics {

enum class SolverMode { Ode, Sde };
enum class OdeScheme { Euler, Rk4 };

std::string to_string(SolverMode m);
std::string to_string(OdeScheme s);
SolverMode solver_mode_from_string(const std::string& s);
OdeScheme ode_scheme_from_string(const std::string& s);

struct DynamicsConfig {
    Index latent_dim = 2;
    std::vector<Index> hidden{64, 64};
    /// Weight of the momentum term in the drift; 0 disables it.
    double beta = 0.0;
    /// EMA factor of the drift history.
    double gamma = 0.9;
    SolverMode mode = SolverMode::Ode;
    /// Scheme for ode mode; sde mode always uses Euler-Maruyama.
    OdeScheme scheme = OdeScheme::Euler;
    /// Initial diffusion magnitude (set through the head bias).
    double diffusion_init = 0.1;
    std::uint64_t seed = 0;
};

/// Drift, diffusion and growth networks on input [z, t].
struct DynamicsModel {
    Mlp drift;      // d + 1 -> d
    Mlp diffusion;  // d + 1 -> d, softplus head
    Mlp growth;     // d + 1 -> 1, softplus head
    double beta = 0.0;
    double gamma = 0.9;
    SolverMode mode = SolverMode::Ode;
    OdeScheme scheme = OdeScheme::Euler;

    Index latent_dim() const { return drift.output_dim(); }
};

/// Glorot-initialized networks. The growth head bias starts at
/// softplus^-1(1) so initial growth is close to 1.
DynamicsModel make_dynamics_model(const DynamicsConfig& cfg);

/// Checks network shapes and momentum ranges.
void validate(const DynamicsModel& m);

/// Rows [z, t].
Matrix with_time(const Matrix& z, double t);

Vector eval_drift(const DynamicsModel& m, const Vector& z, double t);
Vector eval_diffusion(const DynamicsModel& m, const Vector& z, double t);
double eval_growth(const DynamicsModel& m, const Vector& z, double t);

/// Batched growth at one time.
Vector eval_growth_batch(const DynamicsModel& m, const Matrix& z, double t);

}  // namespace cellflow::dynamics
