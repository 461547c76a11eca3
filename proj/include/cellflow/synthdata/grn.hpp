#pragma once

#include "cellflow/numerics/rng.hpp"
#include "cellflow/numerics/types.hpp"

#include <cstdint>
#include <vector>

namespace cellflow::synthdata {

/// regulator -> target with a signed Hill term w * x^n / (K^n + x^n).
struct GrnEdge {
    Index regulator = 0;
    Index target = 0;
    double weight = 0.0;
    double hill_k = 1.0;
    double hill_n = 2.0;
};

struct StateTransition {
    Index from = 0;
    Index to = 0;
};

struct GrnSpec {
    Index genes = 0;
    std::vector<GrnEdge> edges;
    Vector basal;
    Vector decay;
    /// Genes driven directly by the state programs; they have no incoming edges.
    std::vector<Index> master_regulators;
    /// states x master regulators: production rate of each master regulator in each state.
    Matrix programs;
    std::vector<StateTransition> transitions;
    /// Explicit state sequences to simulate. Empty means every root-to-leaf
    /// path of the (then necessarily acyclic) transition graph.
    std::vector<std::vector<Index>> lineages;
    Index root = 0;
    double noise_scale = 0.1;
    double dt = 0.05;
    /// Steps spent in the root state before a lineage starts.
    Index burn_in = 100;

    Index states() const { return programs.rows(); }
};

/// Throws InvalidArgument on malformed specs (bad indices, incoming edges into
/// master regulators, nonpositive decay or Hill constants, lineages that do not
/// follow transitions).
void validate(const GrnSpec& spec);

/// Deterministic part of the Hill ODE.
Vector grn_rate(const GrnSpec& spec, const Vector& basal, const Vector& x);

/// One Euler-Maruyama step with noise std noise_scale * sqrt(x) * sqrt(dt),
/// clamped at zero. Always draws one normal per gene when noise is on, so the
/// stream position never depends on the state.
Vector grn_step(const GrnSpec& spec, const Vector& x, double dt, Rng& rng);
Vector grn_step(const GrnSpec& spec, const Vector& basal, const Vector& x, double dt, Rng& rng);

/// Same arithmetic as grn_step, bit for bit, with buffers reused across steps.
class GrnStepper {
public:
    explicit GrnStepper(const GrnSpec& spec);
    void step(const Vector& basal, Vector& x, double dt, Rng& rng);

private:
    const GrnSpec& spec_;
    /// Edges grouped by target, edge order kept within a target.
    std::vector<Index> offsets_;
    std::vector<const GrnEdge*> incoming_;
    Vector next_;
};

/// Basal vector with master regulators set to the given program row.
Vector basal_for_program(const GrnSpec& spec, const Vector& program);

/// Noise-free fixed point reached by iterating x <- max(0, rate-balance).
/// Exact after depth-many sweeps on an acyclic network.
Vector steady_state(const GrnSpec& spec, const Vector& basal, Index max_sweeps = 0);

/// Lineages that simulate_lineages will walk.
std::vector<std::vector<Index>> resolve_lineages(const GrnSpec& spec);

/// Random layered network: genes are ordered so every regulator precedes its
/// targets, and Hill constants are set to half the regulator's mean steady
/// level across states.
struct RandomGrnOptions {
    Index genes = 100;
    Index master_regulators = 9;
    Index max_regulators = 3;
    double repression_fraction = 0.25;
    double noise_scale = 0.1;
};
GrnSpec random_grn(const RandomGrnOptions& opt, const Matrix& programs, std::uint64_t seed);

}  // namespace cellflow::synthdata
