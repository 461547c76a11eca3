#include "cellflow/dynamics/integrate.hpp"

#include "cellflow/error.hpp"
#include "cellflow/numerics/rng.hpp"

#include <cmath>

namespace cellflow::dynamics {

Matrix TrajectoryBatch::path(Index cell) const {
    Matrix p(static_cast<Index>(states.size()), states.front().cols());
    for (std::size_t k = 0; k < states.size(); ++k) p.row(static_cast<Index>(k)) = states[k].row(cell);
    return p;
}

namespace {

Matrix drift_at(const DynamicsModel& m, const Matrix& z, double t) { return m.drift.forward(with_time(z, t)); }

// Momentum blend b = alpha * f + shift, with shift carrying the history term.
struct Blend {
    double alpha = 1.0;
    Matrix shift;
};

Blend blend_for_step(const DynamicsModel& m, Index k, const std::vector<Matrix>& momentum, Index n, Index d) {
    Blend b;
    if (k == 0 || m.beta == 0.0) {
        b.shift = Matrix::Zero(n, d);
        return b;
    }
    b.alpha = 1.0 - m.beta * m.gamma;
    b.shift = (m.beta * m.gamma) * momentum[static_cast<std::size_t>(k - 1)];
    return b;
}

bool use_rk4(const DynamicsModel& m) { return m.mode == SolverMode::Ode && m.scheme == OdeScheme::Rk4; }

}  // namespace

TrajectoryBatch integrate(const DynamicsModel& m, const Matrix& z0, double t0, double t1, Index n_steps,
                          std::uint64_t noise_seed) {
    validate(m);
    require(n_steps >= 1, "integrate: n_steps must be at least 1");
    require(std::isfinite(t0) && std::isfinite(t1) && t1 > t0, "integrate: need finite t0 < t1");
    const Index n = z0.rows(), d = m.latent_dim();
    if (z0.cols() != d) fail(ErrorCode::ShapeMismatch, "integrate: initial states have the wrong dimension");
    if (!all_finite(z0)) fail(ErrorCode::Numeric, "integrate: non-finite initial state");

    TrajectoryBatch b;
    b.step = (t1 - t0) / static_cast<double>(n_steps);
    b.mode = m.mode;
    b.scheme = m.scheme;
    b.masses = Vector::Ones(n);
    b.states.reserve(static_cast<std::size_t>(n_steps + 1));
    b.states.push_back(z0);
    for (Index k = 0; k <= n_steps; ++k) b.times.push_back(t0 + static_cast<double>(k) * b.step);

    if (m.mode == SolverMode::Sde) {
        b.noise.assign(static_cast<std::size_t>(n_steps), Matrix(n, d));
        for (Index i = 0; i < n; ++i) {
            Rng rng(noise_seed, static_cast<std::uint64_t>(i));
            for (Index k = 0; k < n_steps; ++k)
                for (Index j = 0; j < d; ++j) b.noise[static_cast<std::size_t>(k)](i, j) = rng.normal();
        }
    }

    const double h = b.step;
    const double sqrt_h = std::sqrt(h);
    for (Index k = 0; k < n_steps; ++k) {
        const Matrix& z = b.states.back();
        const double t = b.times[static_cast<std::size_t>(k)];
        Matrix f = drift_at(m, z, t);
        Matrix v = k == 0 ? f : (m.gamma * b.momentum.back() + (1.0 - m.gamma) * f).eval();
        const Blend bl = blend_for_step(m, k, b.momentum, n, d);
        Matrix next;
        if (use_rk4(m)) {
            const Matrix k1 = bl.alpha * f + bl.shift;
            const Matrix k2 = bl.alpha * drift_at(m, z + 0.5 * h * k1, t + 0.5 * h) + bl.shift;
            const Matrix k3 = bl.alpha * drift_at(m, z + 0.5 * h * k2, t + 0.5 * h) + bl.shift;
            const Matrix k4 = bl.alpha * drift_at(m, z + h * k3, t + h) + bl.shift;
            next = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        } else {
            next = z + h * (bl.alpha * f + bl.shift);
            if (m.mode == SolverMode::Sde) {
                const Matrix sigma = m.diffusion.forward(with_time(z, t));
                next += sqrt_h * sigma.cwiseProduct(b.noise[static_cast<std::size_t>(k)]);
            }
        }
        if (!all_finite(next))
            fail(ErrorCode::Numeric, "integrate: non-finite state at step " + std::to_string(k + 1));
        b.drift_evals.push_back(std::move(f));
        b.momentum.push_back(std::move(v));
        b.states.push_back(std::move(next));
    }
    return b;
}

namespace {

bool has(const std::vector<Matrix>& v, Index k) {
    return k < static_cast<Index>(v.size()) && v[static_cast<std::size_t>(k)].size() > 0;
}

// Backprop through the drift at (z, t): adds parameter gradients and returns dL/dz.
Matrix drift_backward(const DynamicsModel& m, const Matrix& z, double t, const Matrix& up, Vector& grad) {
    Mlp::Tape tape;
    m.drift.forward(with_time(z, t), tape);
    return m.drift.backward(tape, up, grad).leftCols(z.cols());
}

}  // namespace

DynamicsGradient backprop_integrate(const DynamicsModel& m, const TrajectoryBatch& batch,
                                    const std::vector<Matrix>& state_grads,
                                    const std::vector<Matrix>* drift_eval_grads) {
    validate(m);
    const Index steps = batch.steps();
    if (steps < 1 || static_cast<Index>(batch.drift_evals.size()) != steps ||
        static_cast<Index>(batch.momentum.size()) != steps)
        fail(ErrorCode::InvalidArgument, "backprop_integrate: batch is missing recorded states");
    if (batch.mode == SolverMode::Sde && static_cast<Index>(batch.noise.size()) != steps)
        fail(ErrorCode::InvalidArgument, "backprop_integrate: batch is missing recorded noise");
    if (batch.mode != m.mode || batch.scheme != m.scheme)
        fail(ErrorCode::InvalidArgument, "backprop_integrate: batch was produced with a different solver");
    require(static_cast<Index>(state_grads.size()) <= steps + 1, "backprop_integrate: too many state gradients");

    const Index n = batch.cells(), d = m.latent_dim();
    const double h = batch.step;
    const double sqrt_h = std::sqrt(h);
    DynamicsGradient out{Vector::Zero(m.drift.parameter_count()), Vector::Zero(m.diffusion.parameter_count()),
                         Matrix::Zero(n, d)};

    Matrix gz = has(state_grads, steps) ? state_grads[static_cast<std::size_t>(steps)] : Matrix::Zero(n, d);
    Matrix gv = Matrix::Zero(n, d);  // adjoint of v_k flowing from later steps
    for (Index k = steps - 1; k >= 0; --k) {
        const auto ks = static_cast<std::size_t>(k);
        const Matrix& z = batch.states[ks];
        const double t = batch.times[ks];
        const Blend bl = blend_for_step(m, k, batch.momentum, n, d);
        const bool blended = k > 0 && m.beta != 0.0;
        const double v_coeff = k == 0 ? 1.0 : 1.0 - m.gamma;

        Matrix gz_prev = gz;  // identity path z_k -> z_{k+1}
        Matrix gshift = Matrix::Zero(n, d);
        Matrix gf;  // adjoint of f_k = F(z_k, t_k)

        if (use_rk4(m)) {
            const Matrix& f = batch.drift_evals[ks];
            const Matrix k1 = bl.alpha * f + bl.shift;
            const Matrix y2 = z + 0.5 * h * k1;
            const Matrix k2 = bl.alpha * drift_at(m, y2, t + 0.5 * h) + bl.shift;
            const Matrix y3 = z + 0.5 * h * k2;
            const Matrix k3 = bl.alpha * drift_at(m, y3, t + 0.5 * h) + bl.shift;
            const Matrix y4 = z + h * k3;

            Matrix gk4 = (h / 6.0) * gz;
            Matrix gk3 = (h / 3.0) * gz;
            Matrix gk2 = (h / 3.0) * gz;
            Matrix gk1 = (h / 6.0) * gz;

            Matrix gy = drift_backward(m, y4, t + h, bl.alpha * gk4, out.drift);
            gshift += gk4;
            gz_prev += gy;
            gk3 += h * gy;

            gy = drift_backward(m, y3, t + 0.5 * h, bl.alpha * gk3, out.drift);
            gshift += gk3;
            gz_prev += gy;
            gk2 += 0.5 * h * gy;

            gy = drift_backward(m, y2, t + 0.5 * h, bl.alpha * gk2, out.drift);
            gshift += gk2;
            gz_prev += gy;
            gk1 += 0.5 * h * gy;

            gshift += gk1;
            gf = bl.alpha * gk1;
        } else {
            const Matrix gb = h * gz;
            gshift = gb;
            gf = bl.alpha * gb;
            if (m.mode == SolverMode::Sde) {
                Mlp::Tape tape;
                m.diffusion.forward(with_time(z, t), tape);
                const Matrix up = sqrt_h * gz.cwiseProduct(batch.noise[ks]);
                gz_prev += m.diffusion.backward(tape, up, out.diffusion).leftCols(d);
            }
        }

        gf += v_coeff * gv;
        if (drift_eval_grads && has(*drift_eval_grads, k)) gf += (*drift_eval_grads)[ks];
        gz_prev += drift_backward(m, z, t, gf, out.drift);

        // v_k = gamma v_{k-1} + (1 - gamma) f_k; shift = beta gamma v_{k-1}
        if (k > 0) {
            gv *= m.gamma;
            if (blended) gv += (m.beta * m.gamma) * gshift;
        }

        gz = gz_prev;
        if (has(state_grads, k)) gz += state_grads[ks];
    }
    out.z0 = gz;
    return out;
}

}  // namespace cellflow::dynamics
