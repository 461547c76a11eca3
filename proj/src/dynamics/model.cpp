#include "cellflow/dynamics/model.hpp"

#include "cellflow/error.hpp"

namespace cellflow::dynamics {

std::string to_string(SolverMode m) { return m == SolverMode::Ode ? "ode" : "sde"; }
std::string to_string(OdeScheme s) { return s == OdeScheme::Euler ? "euler" : "rk4"; }

SolverMode solver_mode_from_string(const std::string& s) {
    if (s == "ode") return SolverMode::Ode;
    if (s == "sde") return SolverMode::Sde;
    fail(ErrorCode::Config, "unknown solver mode '" + s + "' (expected ode or sde)");
}

OdeScheme ode_scheme_from_string(const std::string& s) {
    if (s == "euler") return OdeScheme::Euler;
    if (s == "rk4") return OdeScheme::Rk4;
    fail(ErrorCode::Config, "unknown ode scheme '" + s + "' (expected euler or rk4)");
}

DynamicsModel make_dynamics_model(const DynamicsConfig& cfg) {
    require(cfg.latent_dim >= 1, "dynamics: latent_dim must be positive");
    require(cfg.diffusion_init > 0.0, "dynamics: diffusion_init must be positive");
    Rng rng(cfg.seed, 0x64796e616d696373ULL);
    const Index d = cfg.latent_dim;
    auto sizes = [&](Index out) {
        std::vector<Index> s{d + 1};
        s.insert(s.end(), cfg.hidden.begin(), cfg.hidden.end());
        s.push_back(out);
        return s;
    };
    DynamicsModel m;
    m.drift = Mlp::glorot(sizes(d), Activation::Tanh, Activation::Identity, rng);
    m.diffusion = Mlp::glorot(sizes(d), Activation::Tanh, Activation::Softplus, rng);
    m.growth = Mlp::glorot(sizes(1), Activation::Tanh, Activation::Softplus, rng);
    const Index last = m.diffusion.layer_count() - 1;
    m.diffusion.bias(last).setConstant(softplus_inverse(cfg.diffusion_init));
    m.growth.bias(m.growth.layer_count() - 1).setConstant(softplus_inverse(1.0));
    m.beta = cfg.beta;
    m.gamma = cfg.gamma;
    m.mode = cfg.mode;
    m.scheme = cfg.scheme;
    validate(m);
    return m;
}

void validate(const DynamicsModel& m) {
    const Index d = m.drift.output_dim();
    require(m.drift.input_dim() == d + 1, "dynamics: drift must map d + 1 inputs to d outputs");
    require(m.diffusion.input_dim() == d + 1 && m.diffusion.output_dim() == d,
            "dynamics: diffusion must map d + 1 inputs to d outputs");
    require(m.growth.input_dim() == d + 1 && m.growth.output_dim() == 1,
            "dynamics: growth must map d + 1 inputs to 1 output");
    require(m.diffusion.activations().back() == Activation::Softplus, "dynamics: diffusion head must be softplus");
    require(m.growth.activations().back() == Activation::Softplus, "dynamics: growth head must be softplus");
    require(m.beta >= 0.0 && m.beta <= 1.0, "dynamics: beta must lie in [0, 1]");
    require(m.gamma >= 0.0 && m.gamma < 1.0, "dynamics: gamma must lie in [0, 1)");
}

Matrix with_time(const Matrix& z, double t) {
    Matrix out(z.rows(), z.cols() + 1);
    out.leftCols(z.cols()) = z;
    out.col(z.cols()).setConstant(t);
    return out;
}

namespace {

Vector single(const Mlp& net, const Vector& z, double t, Index d) {
    if (z.size() != d)
        fail(ErrorCode::ShapeMismatch,
             "dynamics: state has length " + std::to_string(z.size()) + ", expected " + std::to_string(d));
    Vector in(d + 1);
    in.head(d) = z;
    in(d) = t;
    return net.forward(in);
}

}  // namespace

Vector eval_drift(const DynamicsModel& m, const Vector& z, double t) { return single(m.drift, z, t, m.latent_dim()); }

Vector eval_diffusion(const DynamicsModel& m, const Vector& z, double t) {
    return single(m.diffusion, z, t, m.latent_dim());
}

double eval_growth(const DynamicsModel& m, const Vector& z, double t) {
    return single(m.growth, z, t, m.latent_dim())(0);
}

Vector eval_growth_batch(const DynamicsModel& m, const Matrix& z, double t) {
    if (z.cols() != m.latent_dim()) fail(ErrorCode::ShapeMismatch, "eval_growth_batch: latent dimension mismatch");
    return m.growth.forward(with_time(z, t)).col(0);
}

}  // namespace cellflow::dynamics
