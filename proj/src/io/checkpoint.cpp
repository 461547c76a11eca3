#include "cellflow/io/checkpoint.hpp"

#include "cellflow/error.hpp"
#include "cellflow/io/csv.hpp"

namespace cellflow::io {

using nlohmann::json;

namespace {

constexpr const char* kDynamicsFormat = "cellflow-dynamics";
constexpr const char* kAutoencoderFormat = "cellflow-autoencoder";

json envelope(const char* format, json model, const json& meta) {
    json j;
    j["format"] = format;
    j["version"] = kCheckpointVersion;
    j["model"] = std::move(model);
    j["meta"] = meta.is_null() ? json::object() : meta;
    return j;
}

const json& open_envelope(const json& j, const char* format, const std::filesystem::path& path) {
    if (!j.is_object() || !j.contains("format") || !j.contains("version") || !j.contains("model"))
        fail(ErrorCode::Format, path.string() + ": not a checkpoint");
    if (j["format"] != format)
        fail(ErrorCode::Format, path.string() + ": expected format '" + format + "', found " + j["format"].dump());
    if (!j["version"].is_number_integer() || j["version"].get<int>() != kCheckpointVersion)
        fail(ErrorCode::VersionMismatch, path.string() + ": checkpoint version " + j["version"].dump() +
                                             " is not supported (expected " + std::to_string(kCheckpointVersion) + ")");
    return j["model"];
}

}  // namespace

json vector_to_json(const Vector& v) {
    json a = json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

Vector vector_from_json(const json& j) {
    if (!j.is_array()) fail(ErrorCode::Format, "expected a numeric array");
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) fail(ErrorCode::Format, "expected a numeric array");
        v[static_cast<Index>(i)] = j[i].get<double>();
    }
    return v;
}

json mlp_to_json(const Mlp& m) {
    json acts = json::array();
    for (auto a : m.activations()) acts.push_back(to_string(a));
    return {{"sizes", m.sizes()}, {"activations", acts}, {"parameters", vector_to_json(m.parameters())}};
}

Mlp mlp_from_json(const json& j) {
    try {
        std::vector<Activation> acts;
        for (const auto& a : j.at("activations")) acts.push_back(activation_from_string(a.get<std::string>()));
        Mlp m(j.at("sizes").get<std::vector<Index>>(), acts);
        const Vector p = vector_from_json(j.at("parameters"));
        if (p.size() != m.parameter_count())
            fail(ErrorCode::Format, "network has " + std::to_string(p.size()) + " parameters, layout needs " +
                                        std::to_string(m.parameter_count()));
        m.set_parameters(p);
        return m;
    } catch (const json::exception& e) {
        fail(ErrorCode::Format, std::string("malformed network: ") + e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Format) throw;
        fail(ErrorCode::Format, std::string("malformed network: ") + e.what());
    }
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const std::filesystem::path& path) {
    const std::string text = read_text(path);
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorCode::Format, path.string() + ": invalid JSON: " + e.what());
    }
}

void save_dynamics(const std::filesystem::path& path, const DynamicsCheckpoint& ckpt) {
    const auto& m = ckpt.model;
    json model = {{"drift", mlp_to_json(m.drift)},
                  {"diffusion", mlp_to_json(m.diffusion)},
                  {"growth", mlp_to_json(m.growth)},
                  {"beta", m.beta},
                  {"gamma", m.gamma},
                  {"mode", dynamics::to_string(m.mode)},
                  {"scheme", dynamics::to_string(m.scheme)}};
    write_json(path, envelope(kDynamicsFormat, std::move(model), ckpt.meta));
}

DynamicsCheckpoint load_dynamics(const std::filesystem::path& path) {
    const json doc = read_json(path);
    const json& j = open_envelope(doc, kDynamicsFormat, path);
    DynamicsCheckpoint c;
    try {
        c.model.drift = mlp_from_json(j.at("drift"));
        c.model.diffusion = mlp_from_json(j.at("diffusion"));
        c.model.growth = mlp_from_json(j.at("growth"));
        c.model.beta = j.at("beta").get<double>();
        c.model.gamma = j.at("gamma").get<double>();
        c.model.mode = dynamics::solver_mode_from_string(j.at("mode").get<std::string>());
        c.model.scheme = dynamics::ode_scheme_from_string(j.at("scheme").get<std::string>());
    } catch (const json::exception& e) {
        fail(ErrorCode::Format, path.string() + ": malformed dynamics model: " + e.what());
    } catch (const Error& e) {
        fail(ErrorCode::Format, path.string() + ": " + e.what());
    }
    try {
        dynamics::validate(c.model);
    } catch (const Error& e) {
        fail(ErrorCode::Format, path.string() + ": " + e.what());
    }
    c.meta = doc.value("meta", json::object());
    return c;
}

void save_autoencoder(const std::filesystem::path& path, const AutoencoderCheckpoint& ckpt) {
    const auto& m = ckpt.model;
    json model = {{"encoder", mlp_to_json(m.encoder)},
                  {"decoder", mlp_to_json(m.decoder)},
                  {"input_mean", vector_to_json(m.input_mean)},
                  {"input_scale", m.input_scale},
                  {"distance_scale", m.distance_scale},
                  {"lambda_geo", m.lambda_geo},
                  {"lambda_rec", m.lambda_rec},
                  {"loss_history", m.loss_history}};
    write_json(path, envelope(kAutoencoderFormat, std::move(model), ckpt.meta));
}

AutoencoderCheckpoint load_autoencoder(const std::filesystem::path& path) {
    const json doc = read_json(path);
    const json& j = open_envelope(doc, kAutoencoderFormat, path);
    AutoencoderCheckpoint c;
    try {
        c.model.encoder = mlp_from_json(j.at("encoder"));
        c.model.decoder = mlp_from_json(j.at("decoder"));
        c.model.input_mean = vector_from_json(j.at("input_mean"));
        c.model.input_scale = j.at("input_scale").get<double>();
        c.model.distance_scale = j.at("distance_scale").get<double>();
        c.model.lambda_geo = j.at("lambda_geo").get<double>();
        c.model.lambda_rec = j.at("lambda_rec").get<double>();
        c.model.loss_history = j.at("loss_history").get<std::vector<double>>();
    } catch (const json::exception& e) {
        fail(ErrorCode::Format, path.string() + ": malformed autoencoder: " + e.what());
    }
    if (c.model.input_mean.size() != c.model.encoder.input_dim() ||
        c.model.decoder.input_dim() != c.model.encoder.output_dim() ||
        c.model.decoder.output_dim() != c.model.encoder.input_dim())
        fail(ErrorCode::Format, path.string() + ": autoencoder layers do not fit together");
    c.meta = doc.value("meta", json::object());
    return c;
}

}  // namespace cellflow::io
