#include "cellflow/geometry/gaga.hpp"

#include "cellflow/error.hpp"
#include "cellflow/numerics/adam.hpp"
#include "cellflow/numerics/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cellflow::geometry {

namespace {

Matrix standardize(const GeoAutoencoder& ae, const Matrix& x) {
    return (x.rowwise() - ae.input_mean.transpose()) / ae.input_scale;
}

struct StepLoss {
    double geo = 0.0;
    double rec = 0.0;
};

// Loss and gradients on one batch of standardized rows with scaled targets.
StepLoss batch_gradients(const GeoAutoencoder& ae, const Matrix& xs, const Matrix& target, Vector& enc_grad,
                         Vector& dec_grad) {
    const Index b = xs.rows();
    Mlp::Tape enc_tape, dec_tape;
    const Matrix z = ae.encoder.forward(xs, enc_tape);
    Matrix gz = Matrix::Zero(b, z.cols());
    StepLoss loss;

    if (ae.lambda_geo > 0.0 && b >= 2) {
        const double pairs = 0.5 * static_cast<double>(b) * static_cast<double>(b - 1);
        const double w = ae.lambda_geo / pairs;
        for (Index i = 0; i < b; ++i) {
            for (Index j = i + 1; j < b; ++j) {
                const RowVector diff = z.row(i) - z.row(j);
                const double dz = diff.norm();
                const double r = dz - target(i, j);
                loss.geo += r * r;
                if (dz > 1e-12) {
                    const RowVector g = (2.0 * w * r / dz) * diff;
                    gz.row(i) += g;
                    gz.row(j) -= g;
                }
            }
        }
        loss.geo /= pairs;
    }

    const Matrix recon = ae.decoder.forward(z, dec_tape);
    const Matrix err = recon - xs;
    loss.rec = err.squaredNorm() / static_cast<double>(b);
    if (ae.lambda_rec > 0.0) {
        const Matrix up = (2.0 * ae.lambda_rec / static_cast<double>(b)) * err;
        gz += ae.decoder.backward(dec_tape, up, dec_grad);
    }
    ae.encoder.backward(enc_tape, gz, enc_grad);
    return loss;
}

}  // namespace

GeoAutoencoder train_gaga(const Matrix& x, const PotentialDistances& target, const GagaConfig& cfg) {
    const Index n = x.rows();
    require(n >= 2, "train_gaga: need at least two points");
    require(target.D.rows() == n && target.D.cols() == n, "train_gaga: distance matrix does not match data");
    require(cfg.latent_dim >= 1 && cfg.epochs >= 1 && cfg.batch_size >= 2, "train_gaga: invalid configuration");
    require(cfg.lambda_geo >= 0.0 && cfg.lambda_rec >= 0.0, "train_gaga: loss weights must be nonnegative");
    require(all_finite(x), "train_gaga: non-finite input");

    Rng rng(cfg.seed, 0x67616761ULL);
    GeoAutoencoder ae;
    ae.lambda_geo = cfg.lambda_geo;
    ae.lambda_rec = cfg.lambda_rec;
    ae.input_mean = x.colwise().mean().transpose();
    const Matrix centered = x.rowwise() - ae.input_mean.transpose();
    ae.input_scale = std::sqrt(centered.squaredNorm() / static_cast<double>(n * x.cols()));
    if (!(ae.input_scale > 0.0)) ae.input_scale = 1.0;

    std::vector<double> upper;
    upper.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j) upper.push_back(target.D(i, j));
    ae.distance_scale = median(upper);
    if (!(ae.distance_scale > 0.0)) ae.distance_scale = 1.0;

    std::vector<Index> enc_sizes{x.cols()}, dec_sizes{cfg.latent_dim};
    for (Index h : cfg.hidden) enc_sizes.push_back(h);
    enc_sizes.push_back(cfg.latent_dim);
    for (auto it = cfg.hidden.rbegin(); it != cfg.hidden.rend(); ++it) dec_sizes.push_back(*it);
    dec_sizes.push_back(x.cols());
    ae.encoder = Mlp::glorot(enc_sizes, Activation::Tanh, Activation::Identity, rng);
    ae.decoder = Mlp::glorot(dec_sizes, Activation::Tanh, Activation::Identity, rng);

    const Matrix xs = standardize(ae, x);
    const Matrix scaled_target = target.D / ae.distance_scale;

    AdamConfig opt;
    opt.lr = cfg.lr;
    AdamState enc_state(ae.encoder.parameter_count()), dec_state(ae.decoder.parameter_count());
    const Index batch = n <= kAllPairsLimit ? n : std::min(cfg.batch_size, n);

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    for (Index epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (batch < n) {
            const auto perm = rng.permutation(n);
            order.assign(perm.begin(), perm.end());
        }
        double epoch_loss = 0.0;
        Index steps = 0;
        for (Index start = 0; start + batch <= n; start += batch) {
            const std::vector<Index> rows(order.begin() + start, order.begin() + start + batch);
            Matrix sub_target(batch, batch);
            for (Index i = 0; i < batch; ++i)
                for (Index j = 0; j < batch; ++j) sub_target(i, j) = scaled_target(rows[i], rows[j]);
            Vector enc_grad = Vector::Zero(ae.encoder.parameter_count());
            Vector dec_grad = Vector::Zero(ae.decoder.parameter_count());
            const auto loss = batch_gradients(ae, take_rows(xs, rows), sub_target, enc_grad, dec_grad);
            const double total = cfg.lambda_geo * loss.geo + cfg.lambda_rec * loss.rec;
            if (!std::isfinite(total))
                fail(ErrorCode::Numeric, "train_gaga: non-finite loss at epoch " + std::to_string(epoch + 1));
            epoch_loss += total;
            ++steps;
            adam_step(ae.encoder.parameters(), enc_grad, enc_state, opt);
            if (cfg.lambda_rec > 0.0) adam_step(ae.decoder.parameters(), dec_grad, dec_state, opt);
        }
        ae.loss_history.push_back(epoch_loss / static_cast<double>(steps));
    }
    return ae;
}

Matrix encode(const GeoAutoencoder& ae, const Matrix& x) {
    if (x.cols() != ae.input_dim())
        fail(ErrorCode::ShapeMismatch, "encode: expected " + std::to_string(ae.input_dim()) + " columns, got " +
                                           std::to_string(x.cols()));
    return ae.distance_scale * ae.encoder.forward(standardize(ae, x));
}

Matrix decode(const GeoAutoencoder& ae, const Matrix& z) {
    if (z.cols() != ae.latent_dim())
        fail(ErrorCode::ShapeMismatch, "decode: expected " + std::to_string(ae.latent_dim()) + " columns, got " +
                                           std::to_string(z.cols()));
    Matrix x = ae.decoder.forward(Matrix(z / ae.distance_scale)) * ae.input_scale;
    return x.rowwise() + ae.input_mean.transpose();
}

}  // namespace cellflow::geometry
