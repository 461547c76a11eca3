#pragma once

#include "cellflow/geometry/diffusion.hpp"
#include "cellflow/numerics/mlp.hpp"

#include <cstdint>
#include <vector>

namespace cellflow::geometry {

struct GagaConfig {
    Index latent_dim = 2;
    std::vector<Index> hidden{64, 64};
    Index epochs = 300;
    /// Points per step when n exceeds kAllPairsLimit; all pairs inside a batch are used.
    Index batch_size = 256;
    double lr = 2e-3;
    double lambda_geo = 1.0;
    double lambda_rec = 0.1;
    std::uint64_t seed = 0;
};

/// Up to this many points every step sees all pairs.
inline constexpr Index kAllPairsLimit = 512;

/// Distance-matching autoencoder. The networks work in standardized units:
/// inputs are centered and divided by one global scale, and latent
/// coordinates are multiplied by `distance_scale` (the median target
/// distance) on the way out.
struct GeoAutoencoder {
    Mlp encoder;
    Mlp decoder;
    Vector input_mean;
    double input_scale = 1.0;
    double distance_scale = 1.0;
    double lambda_geo = 1.0;
    double lambda_rec = 0.1;
    /// Mean training loss per epoch.
    std::vector<double> loss_history;

    Index input_dim() const { return encoder.input_dim(); }
    Index latent_dim() const { return encoder.output_dim(); }
};

GeoAutoencoder train_gaga(const Matrix& x, const PotentialDistances& target, const GagaConfig& cfg);

Matrix encode(const GeoAutoencoder& ae, const Matrix& x);
Matrix decode(const GeoAutoencoder& ae, const Matrix& z);

}  // namespace cellflow::geometry
