#include "cellflow/numerics/mlp.hpp"

#include "cellflow/error.hpp"

#include <cmath>

namespace cellflow {

std::string to_string(Activation a) {
    switch (a) {
        case Activation::Tanh: return "tanh";
        case Activation::Relu: return "relu";
        case Activation::Softplus: return "softplus";
        case Activation::Identity: return "identity";
    }
    return "identity";
}

Activation activation_from_string(const std::string& name) {
    if (name == "tanh") return Activation::Tanh;
    if (name == "relu") return Activation::Relu;
    if (name == "softplus") return Activation::Softplus;
    if (name == "identity") return Activation::Identity;
    fail(ErrorCode::Format, "unknown activation '" + name + "'");
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x))); }

double softplus_inverse(double y) {
    require(y > 0.0, "softplus_inverse: argument must be positive");
    // log(exp(y) - 1), stable for large y
    return y + std::log(-std::expm1(-y));
}

namespace {

void activate(Activation a, const Matrix& pre, Matrix& out) {
    switch (a) {
        case Activation::Tanh: out = pre.array().tanh().matrix(); break;
        case Activation::Relu: out = pre.cwiseMax(0.0); break;
        case Activation::Softplus: out = pre.unaryExpr([](double v) { return softplus(v); }); break;
        case Activation::Identity: out = pre; break;
    }
}

// In place: grad <- grad .* act'(pre)
void activation_backward(Activation a, const Matrix& pre, Matrix& grad) {
    switch (a) {
        case Activation::Tanh:
            grad.array() *= 1.0 - pre.array().tanh().square();
            break;
        case Activation::Relu:
            grad.array() *= (pre.array() > 0.0).cast<double>();
            break;
        case Activation::Softplus:
            grad.array() *= pre.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); }).array();
            break;
        case Activation::Identity: break;
    }
}

}  // namespace

Mlp::Mlp(std::vector<Index> sizes, std::vector<Activation> activations)
    : sizes_(std::move(sizes)), activations_(std::move(activations)) {
    require(sizes_.size() >= 2, "Mlp: need at least input and output sizes");
    require(activations_.size() == sizes_.size() - 1, "Mlp: one activation per layer");
    Index total = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        require(sizes_[l] >= 1 && sizes_[l + 1] >= 1, "Mlp: layer sizes must be positive");
        offsets_.push_back(total);
        total += sizes_[l] * sizes_[l + 1] + sizes_[l + 1];
    }
    params_ = Vector::Zero(total);
}

Mlp Mlp::glorot(std::vector<Index> sizes, Activation hidden, Activation output, Rng& rng) {
    std::vector<Activation> acts(sizes.size() - 1, hidden);
    acts.back() = output;
    Mlp m(std::move(sizes), std::move(acts));
    for (Index l = 0; l < m.layer_count(); ++l) {
        auto w = m.weight(l);
        const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
        for (Index i = 0; i < w.rows(); ++i)
            for (Index j = 0; j < w.cols(); ++j) w(i, j) = rng.uniform(-limit, limit);
    }
    return m;
}

void Mlp::set_parameters(const Vector& p) {
    if (p.size() != params_.size()) fail(ErrorCode::ShapeMismatch, "Mlp::set_parameters: size mismatch");
    params_ = p;
}

Eigen::Map<Matrix> Mlp::weight(Index layer) {
    const auto l = static_cast<std::size_t>(layer);
    return {params_.data() + offset(layer), sizes_[l + 1], sizes_[l]};
}

Eigen::Map<const Matrix> Mlp::weight(Index layer) const {
    const auto l = static_cast<std::size_t>(layer);
    return {params_.data() + offset(layer), sizes_[l + 1], sizes_[l]};
}

Eigen::Map<Vector> Mlp::bias(Index layer) {
    const auto l = static_cast<std::size_t>(layer);
    return {params_.data() + offset(layer) + sizes_[l] * sizes_[l + 1], sizes_[l + 1]};
}

Eigen::Map<const Vector> Mlp::bias(Index layer) const {
    const auto l = static_cast<std::size_t>(layer);
    return {params_.data() + offset(layer) + sizes_[l] * sizes_[l + 1], sizes_[l + 1]};
}

Vector Mlp::forward(const Vector& x) const {
    Matrix row = x.transpose();
    return forward(row).row(0).transpose();
}

Matrix Mlp::forward(const Matrix& x) const {
    if (x.cols() != input_dim()) fail(ErrorCode::ShapeMismatch, "Mlp::forward: input dimension mismatch");
    Matrix a = x;
    Matrix pre;
    for (Index l = 0; l < layer_count(); ++l) {
        pre = a * weight(l).transpose();
        pre.rowwise() += bias(l).transpose();
        activate(activations_[static_cast<std::size_t>(l)], pre, a);
    }
    return a;
}

Matrix Mlp::forward(const Matrix& x, Tape& tape) const {
    if (x.cols() != input_dim()) fail(ErrorCode::ShapeMismatch, "Mlp::forward: input dimension mismatch");
    const auto layers = static_cast<std::size_t>(layer_count());
    tape.inputs.resize(layers);
    tape.pre.resize(layers);
    Matrix a = x;
    for (std::size_t l = 0; l < layers; ++l) {
        tape.inputs[l] = a;
        Matrix& pre = tape.pre[l];
        pre = a * weight(static_cast<Index>(l)).transpose();
        pre.rowwise() += bias(static_cast<Index>(l)).transpose();
        activate(activations_[l], pre, a);
    }
    return a;
}

Matrix Mlp::backward(const Tape& tape, const Matrix& upstream, Eigen::Ref<Vector> param_grad) const {
    if (param_grad.size() != parameter_count()) fail(ErrorCode::ShapeMismatch, "Mlp::backward: gradient size mismatch");
    if (tape.pre.size() != static_cast<std::size_t>(layer_count()))
        fail(ErrorCode::InvalidArgument, "Mlp::backward: tape does not match network");
    if (upstream.cols() != output_dim() || upstream.rows() != tape.pre.back().rows())
        fail(ErrorCode::ShapeMismatch, "Mlp::backward: upstream shape mismatch");

    Matrix grad = upstream;
    for (Index l = layer_count() - 1; l >= 0; --l) {
        const auto ls = static_cast<std::size_t>(l);
        activation_backward(activations_[ls], tape.pre[ls], grad);
        const Index in = sizes_[ls];
        const Index out = sizes_[ls + 1];
        Eigen::Map<Matrix> gw(param_grad.data() + offset(l), out, in);
        Eigen::Map<Vector> gb(param_grad.data() + offset(l) + in * out, out);
        gw.noalias() += grad.transpose() * tape.inputs[ls];
        gb += grad.colwise().sum().transpose();
        Matrix next = grad * weight(l);
        grad = std::move(next);
    }
    return grad;
}

MlpGradient mlp_grad(const Mlp& m, const Vector& x, const Vector& upstream) {
    if (x.size() != m.input_dim() || upstream.size() != m.output_dim())
        fail(ErrorCode::ShapeMismatch, "mlp_grad: dimension mismatch");
    Mlp::Tape tape;
    Matrix row = x.transpose();
    m.forward(row, tape);
    MlpGradient g;
    g.params = Vector::Zero(m.parameter_count());
    Matrix up = upstream.transpose();
    g.input = m.backward(tape, up, g.params).row(0).transpose();
    return g;
}

}  // namespace cellflow
