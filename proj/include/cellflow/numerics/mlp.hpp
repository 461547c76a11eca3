#pragma once

#include "cellflow/numerics/rng.hpp"
#include "cellflow/numerics/types.hpp"

#include <string>
#include <vector>

namespace cellflow {

enum class Activation { Tanh, Relu, Softplus, Identity };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

double softplus(double x);
double softplus_inverse(double y);

/// Feed-forward network with all parameters in one flat vector.
///
/// Layout per layer: weight (out x in, row-major) followed by bias (out).
class Mlp {
public:
    Mlp() = default;
    /// sizes = {in, h1, ..., out}; one activation per layer (sizes.size() - 1).
    Mlp(std::vector<Index> sizes, std::vector<Activation> activations);

    /// Uniform Glorot initialization, zero biases.
    static Mlp glorot(std::vector<Index> sizes, Activation hidden, Activation output, Rng& rng);

    Index input_dim() const { return sizes_.front(); }
    Index output_dim() const { return sizes_.back(); }
    Index layer_count() const { return static_cast<Index>(activations_.size()); }
    Index parameter_count() const { return params_.size(); }
    const std::vector<Index>& sizes() const { return sizes_; }
    const std::vector<Activation>& activations() const { return activations_; }

    Vector& parameters() { return params_; }
    const Vector& parameters() const { return params_; }
    void set_parameters(const Vector& p);

    Eigen::Map<Matrix> weight(Index layer);
    Eigen::Map<const Matrix> weight(Index layer) const;
    Eigen::Map<Vector> bias(Index layer);
    Eigen::Map<const Vector> bias(Index layer) const;

    /// Cached activations from a batched forward pass.
    struct Tape {
        std::vector<Matrix> inputs;  // input to each layer
        std::vector<Matrix> pre;     // pre-activation of each layer
    };

    Vector forward(const Vector& x) const;
    /// Batched forward: one sample per row.
    Matrix forward(const Matrix& x) const;
    Matrix forward(const Matrix& x, Tape& tape) const;

    /// Reverse pass for sum(upstream .* output). Adds parameter gradients into
    /// `param_grad` and returns the input gradient (batch x in).
    Matrix backward(const Tape& tape, const Matrix& upstream, Eigen::Ref<Vector> param_grad) const;

private:
    Index offset(Index layer) const { return offsets_[static_cast<std::size_t>(layer)]; }

    std::vector<Index> sizes_;
    std::vector<Activation> activations_;
    std::vector<Index> offsets_;
    Vector params_;
};

struct MlpGradient {
    Vector params;
    Vector input;
};

/// Single-sample gradient of upstream . mlp(x).
MlpGradient mlp_grad(const Mlp& m, const Vector& x, const Vector& upstream);

}  // namespace cellflow
