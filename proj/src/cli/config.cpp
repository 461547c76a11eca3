#include "cellflow/cli/config.hpp"

#include "cellflow/error.hpp"
#include "cellflow/io/csv.hpp"
#include "cellflow/numerics/rng.hpp"

#include <set>
#include <type_traits>

namespace cellflow::cli {

using nlohmann::json;

namespace {

// Reads known keys of one JSON object and rejects the rest.
class Section {
public:
    Section(const json& doc, std::string name) : name_(std::move(name)) {
        if (!doc.is_object()) fail(ErrorCode::Config, name_ + ": expected an object");
        doc_ = &doc;
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!doc_->contains(key)) return;
        out = convert<T>(doc_->at(key), name_ + "." + key);
    }

    const json* child(const char* key) {
        seen_.insert(key);
        return doc_->contains(key) ? &doc_->at(key) : nullptr;
    }

    bool has(const char* key) const { return doc_->contains(key); }

    void finish() const {
        for (const auto& item : doc_->items())
            if (!seen_.count(item.key())) fail(ErrorCode::Config, "unknown key " + name_ + "." + item.key());
    }

private:
    template <class T>
    static T convert(const json& v, const std::string& where) {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) fail(ErrorCode::Config, where + ": expected true or false");
            return v.get<bool>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) fail(ErrorCode::Config, where + ": expected an integer");
            if (std::is_unsigned_v<T> && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)
                fail(ErrorCode::Config, where + ": expected a nonnegative integer");
            return v.get<T>();
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) fail(ErrorCode::Config, where + ": expected a number");
            return v.get<T>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) fail(ErrorCode::Config, where + ": expected a string");
            return v.get<std::string>();
        } else if constexpr (std::is_same_v<T, std::optional<double>>) {
            if (v.is_null()) return std::nullopt;
            return convert<double>(v, where);
        } else if constexpr (std::is_same_v<T, std::vector<Index>>) {
            if (!v.is_array()) fail(ErrorCode::Config, where + ": expected a list of integers");
            std::vector<Index> out;
            for (const json& e : v) out.push_back(convert<Index>(e, where));
            return out;
        } else {
            static_assert(std::is_same_v<T, std::vector<std::pair<Index, Index>>>);
            if (!v.is_array()) fail(ErrorCode::Config, where + ": expected a list of [ligand, receptor] pairs");
            std::vector<std::pair<Index, Index>> out;
            for (const json& e : v) {
                if (!e.is_array() || e.size() != 2) fail(ErrorCode::Config, where + ": expected [ligand, receptor]");
                out.emplace_back(convert<Index>(e[0], where), convert<Index>(e[1], where));
            }
            return out;
        }
    }

    const json* doc_ = nullptr;
    std::string name_;
    std::set<std::string> seen_;
};

template <class Enum, class Parse>
void get_enum(Section& s, const char* key, Enum& out, Parse parse) {
    std::string text;
    s.get(key, text);
    if (!text.empty()) out = parse(text);
}

bool is_toy(const std::string& preset) {
    return preset == "branching" || preset == "dying" || preset == "growing" || preset == "arc";
}

void read_data(Section s, DataSection& d) {
    s.get("preset", d.preset);
    if (!is_toy(d.preset) && d.preset != "trifurcation" && d.preset != "s_shape")
        fail(ErrorCode::Config, "data.preset: unknown preset '" + d.preset + "'");
    d.cells = d.preset == "trifurcation" ? 500 : d.preset == "s_shape" ? 315 : 100;
    d.steps = d.preset == "s_shape" ? 50 : 200;
    s.get("cells", d.cells);
    s.get("simulated_cells", d.simulated_cells);
    s.get("timepoints", d.timepoints);
    s.get("steps", d.steps);
    s.get("library_lo", d.library_lo);
    s.get("library_hi", d.library_hi);
    s.get("dropout", d.dropout);
    s.get("poisson", d.poisson);
    s.get("spatial_layout", d.spatial_layout);
    s.finish();
}

void read_geometry(Section s, GeometrySection& g) {
    s.get("method", g.method);
    if (g.method != "gaga" && g.method != "pca" && g.method != "identity")
        fail(ErrorCode::Config, "geometry.method: expected gaga, pca or identity");
    s.get("log1p", g.log1p);
    s.get("pca_dim", g.pca_dim);
    s.get("knn", g.knn);
    s.get("diffusion_t", g.diffusion_t);
    s.get("latent_dim", g.latent_dim);
    s.get("hidden", g.hidden);
    s.get("epochs", g.epochs);
    s.get("batch_size", g.batch_size);
    s.get("lr", g.lr);
    s.get("lambda_geo", g.lambda_geo);
    s.get("lambda_rec", g.lambda_rec);
    s.get("standardize", g.standardize);
    s.finish();
}

void read_spatial(Section s, SpatialSection& p) {
    s.get("enabled", p.enabled);
    s.get("k", p.k);
    s.get("hops", p.hops);
    s.get("max_dist", p.max_dist);
    s.get("expression_pca_dim", p.expression_pca_dim);
    s.get("output_dim", p.output_dim);
    s.get("weight", p.weight);
    s.get("lr_pairs", p.lr_pairs);
    s.finish();
}

void read_dynamics(Section s, dynamics::DynamicsConfig& d) {
    s.get("hidden", d.hidden);
    s.get("beta", d.beta);
    s.get("gamma", d.gamma);
    get_enum(s, "mode", d.mode, dynamics::solver_mode_from_string);
    get_enum(s, "scheme", d.scheme, dynamics::ode_scheme_from_string);
    s.get("diffusion_init", d.diffusion_init);
    s.finish();
}

void read_training(Section s, training::TrainConfig& t) {
    get_enum(s, "mode", t.mode, training::train_mode_from_string);
    s.get("iterations", t.iterations);
    s.get("lr", t.lr);
    s.get("lr_final", t.lr_final);
    s.get("batch_size", t.batch_size);
    s.get("lambda_m", t.lambda_m);
    s.get("lambda_e", t.lambda_e);
    s.get("lambda_d", t.lambda_d);
    s.get("k_density", t.k_density);
    s.get("h_margin", t.h_margin);
    s.get("steps_per_unit", t.steps_per_unit);
    s.get("growth", t.growth_enabled);
    s.get("growth_lr_scale", t.growth_lr_scale);
    s.get("pretrain_growth", t.pretrain_growth);
    s.get("pretrain_epochs", t.pretrain_epochs);
    s.get("pretrain_lr", t.pretrain_lr);
    if (const json* u = s.child("uot")) {
        Section us(*u, "training.uot");
        us.get("eps", t.uot.eps);
        us.get("lambda_source", t.uot.lambda_source);
        us.get("lambda_target", t.uot.lambda_target);
        us.finish();
    }
    s.finish();
}

void read_eval(Section s, EvalSection& e) {
    s.get("branches", e.branches);
    s.get("w1_cap", e.w1_cap);
    s.get("loo", e.loo);
    s.finish();
}

void read_output(Section s, OutputSection& o) {
    s.get("dir", o.dir);
    s.get("plot_width", o.plot_width);
    s.get("plot_height", o.plot_height);
    s.finish();
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

PipelineConfig parse_config(const json& doc) {
    PipelineConfig cfg;
    Section root(doc, "config");
    if (!root.has("seed")) fail(ErrorCode::Config, "config: seed is required");
    root.get("seed", cfg.seed);
    // The data section is read even when absent so preset defaults resolve.
    static const json empty = json::object();
    const json* data = root.child("data");
    read_data(Section(data ? *data : empty, "data"), cfg.data);
    if (const json* j = root.child("geometry")) read_geometry(Section(*j, "geometry"), cfg.geometry);
    if (const json* j = root.child("spatial")) read_spatial(Section(*j, "spatial"), cfg.spatial);
    if (const json* j = root.child("dynamics")) read_dynamics(Section(*j, "dynamics"), cfg.dynamics);
    if (const json* j = root.child("training")) read_training(Section(*j, "training"), cfg.training);
    if (const json* j = root.child("eval")) read_eval(Section(*j, "eval"), cfg.eval);
    if (const json* j = root.child("output")) read_output(Section(*j, "output"), cfg.output);
    root.finish();
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) fail(ErrorCode::MissingInput, "config file not found: " + path.string());
    json doc;
    try {
        doc = json::parse(io::read_text(path));
    } catch (const json::exception& e) {
        fail(ErrorCode::Config, path.string() + ": " + e.what());
    }
    return parse_config(doc);
}

json to_json(const PipelineConfig& c) {
    json j;
    j["seed"] = c.seed;
    const auto& d = c.data;
    j["data"] = {{"preset", d.preset},         {"cells", d.cells},       {"simulated_cells", d.simulated_cells},
                 {"timepoints", d.timepoints}, {"steps", d.steps},       {"library_lo", d.library_lo},
                 {"library_hi", d.library_hi}, {"dropout", d.dropout},   {"poisson", d.poisson},
                 {"spatial_layout", d.spatial_layout}};
    const auto& g = c.geometry;
    j["geometry"] = {{"method", g.method},         {"log1p", g.log1p},
                     {"pca_dim", g.pca_dim},       {"knn", g.knn},
                     {"diffusion_t", g.diffusion_t}, {"latent_dim", g.latent_dim},
                     {"hidden", g.hidden},         {"epochs", g.epochs},
                     {"batch_size", g.batch_size}, {"lr", g.lr},
                     {"lambda_geo", g.lambda_geo}, {"lambda_rec", g.lambda_rec},
                     {"standardize", g.standardize}};
    const auto& s = c.spatial;
    json pairs = json::array();
    for (const auto& [l, r] : s.lr_pairs) pairs.push_back({l, r});
    j["spatial"] = {{"enabled", s.enabled},
                    {"k", s.k},
                    {"hops", s.hops},
                    {"max_dist", optional_json(s.max_dist)},
                    {"expression_pca_dim", s.expression_pca_dim},
                    {"output_dim", s.output_dim},
                    {"weight", s.weight},
                    {"lr_pairs", pairs}};
    const auto& m = c.dynamics;
    j["dynamics"] = {{"hidden", m.hidden},
                     {"beta", m.beta},
                     {"gamma", m.gamma},
                     {"mode", dynamics::to_string(m.mode)},
                     {"scheme", dynamics::to_string(m.scheme)},
                     {"diffusion_init", m.diffusion_init}};
    const auto& t = c.training;
    j["training"] = {{"mode", training::to_string(t.mode)},
                     {"iterations", t.iterations},
                     {"lr", t.lr},
                     {"lr_final", t.lr_final},
                     {"batch_size", t.batch_size},
                     {"lambda_m", t.lambda_m},
                     {"lambda_e", t.lambda_e},
                     {"lambda_d", t.lambda_d},
                     {"k_density", t.k_density},
                     {"h_margin", optional_json(t.h_margin)},
                     {"steps_per_unit", t.steps_per_unit},
                     {"growth", t.growth_enabled},
                     {"growth_lr_scale", t.growth_lr_scale},
                     {"pretrain_growth", t.pretrain_growth},
                     {"pretrain_epochs", t.pretrain_epochs},
                     {"pretrain_lr", t.pretrain_lr},
                     {"uot",
                      {{"eps", t.uot.eps}, {"lambda_source", t.uot.lambda_source}, {"lambda_target", t.uot.lambda_target}}}};
    j["eval"] = {{"branches", c.eval.branches}, {"w1_cap", c.eval.w1_cap}, {"loo", c.eval.loo}};
    j["output"] = {{"dir", c.output.dir}, {"plot_width", c.output.plot_width}, {"plot_height", c.output.plot_height}};
    return j;
}

std::uint64_t stage_seed(const PipelineConfig& cfg, Stage s) {
    return derive_seed(cfg.seed, {static_cast<std::uint64_t>(s)});
}

}  // namespace cellflow::cli
