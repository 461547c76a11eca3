#pragma once

#include "cellflow/dynamics/model.hpp"
#include "cellflow/geometry/gaga.hpp"
#include "cellflow/numerics/mlp.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace cellflow::io {

inline constexpr int kCheckpointVersion = 1;

nlohmann::json mlp_to_json(const Mlp& m);
Mlp mlp_from_json(const nlohmann::json& j);

nlohmann::json vector_to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& j);

struct DynamicsCheckpoint {
    dynamics::DynamicsModel model;
    /// Free-form provenance (training mode, seed, config echo, ...).
    nlohmann::json meta;
};

/// {"format": "cellflow-dynamics", "version": 1, "model": ..., "meta": ...}
void save_dynamics(const std::filesystem::path& path, const DynamicsCheckpoint& ckpt);
/// Format on a wrong or malformed document, VersionMismatch on another version.
DynamicsCheckpoint load_dynamics(const std::filesystem::path& path);

struct AutoencoderCheckpoint {
    geometry::GeoAutoencoder model;
    nlohmann::json meta;
};
void save_autoencoder(const std::filesystem::path& path, const AutoencoderCheckpoint& ckpt);
AutoencoderCheckpoint load_autoencoder(const std::filesystem::path& path);

/// Pretty-printed JSON with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace cellflow::io
