#include "cellflow/cli/commands.hpp"

#include "cellflow/eval/branches.hpp"
#include "cellflow/eval/loo.hpp"
#include "cellflow/eval/metrics.hpp"
#include "cellflow/geometry/diffusion.hpp"
#include "cellflow/geometry/gaga.hpp"
#include "cellflow/io/checkpoint.hpp"
#include "cellflow/io/csv.hpp"
#include "cellflow/io/svg.hpp"
#include "cellflow/io/trajectories.hpp"
#include "cellflow/numerics/pca.hpp"
#include "cellflow/numerics/rng.hpp"
#include "cellflow/numerics/scaler.hpp"
#include "cellflow/spatial/features.hpp"
#include "cellflow/synthdata/datasets.hpp"
#include "cellflow/training/rollout.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>

namespace cellflow::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path out_path(const PipelineConfig& cfg, const char* name) { return fs::path(cfg.output.dir) / name; }

fs::path require_input(const PipelineConfig& cfg, const char* name, const char* producer) {
    const fs::path p = out_path(cfg, name);
    if (!fs::exists(p)) fail(ErrorCode::MissingInput, p.string() + " not found (run '" + producer + "' first)");
    return p;
}

struct Labels {
    std::vector<Index> timepoint, branch, state;
    std::vector<double> time;
    Index timepoints = 0;

    Index cells() const { return static_cast<Index>(timepoint.size()); }
};

std::vector<Index> integer_column(const io::Table& t, const std::string& name) {
    const Index c = t.column(name);
    std::vector<Index> out;
    for (Index i = 0; i < t.values.rows(); ++i) {
        const double v = t.values(i, c);
        if (v < 0 || v != std::floor(v)) fail(ErrorCode::Format, "labels: " + name + " must hold nonnegative integers");
        out.push_back(static_cast<Index>(v));
    }
    return out;
}

Labels read_labels(const PipelineConfig& cfg) {
    const io::Table t = io::read_table(require_input(cfg, files::labels, "simulate"));
    Labels l;
    l.timepoint = integer_column(t, "timepoint");
    l.branch = integer_column(t, "branch");
    l.state = integer_column(t, "state");
    const Index tc = t.column("time");
    for (Index i = 0; i < t.values.rows(); ++i) l.time.push_back(t.values(i, tc));
    if (l.timepoint.empty()) fail(ErrorCode::Format, "labels: no cells");
    l.timepoints = *std::max_element(l.timepoint.begin(), l.timepoint.end()) + 1;
    return l;
}

std::vector<std::vector<Index>> rows_by_timepoint(const Labels& l) {
    std::vector<std::vector<Index>> rows(static_cast<std::size_t>(l.timepoints));
    for (Index i = 0; i < l.cells(); ++i) rows[static_cast<std::size_t>(l.timepoint[static_cast<std::size_t>(i)])].push_back(i);
    for (std::size_t t = 0; t < rows.size(); ++t)
        if (rows[t].empty()) fail(ErrorCode::Format, "labels: timepoint " + std::to_string(t) + " has no cells");
    return rows;
}

std::vector<double> unit_times(Index T) {
    std::vector<double> times;
    for (Index t = 0; t < T; ++t) times.push_back(static_cast<double>(t));
    return times;
}

// Latent coordinates the dynamics work in: the embedding, joined with the
// spatial features when enabled.
Matrix dynamics_input(const PipelineConfig& cfg, Index cells) {
    const io::Table lat = io::read_table(require_input(cfg, files::latent, "embed"));
    if (lat.values.rows() != cells)
        fail(ErrorCode::ShapeMismatch, "latent.csv has " + std::to_string(lat.values.rows()) + " rows, labels have " +
                                           std::to_string(cells));
    if (!cfg.spatial.enabled) return lat.values;
    const io::Table sf = io::read_table(require_input(cfg, files::features, "features"));
    if (sf.values.rows() != cells) fail(ErrorCode::ShapeMismatch, "spatial features and latents differ in row count");
    return spatial::joint_embed(lat.values, sf.values, cfg.spatial.weight);
}

std::vector<Matrix> split(const Matrix& z, const std::vector<std::vector<Index>>& rows) {
    std::vector<Matrix> out;
    for (const auto& r : rows) out.push_back(z(r, Eigen::all));
    return out;
}

json scaler_json(const std::optional<LatentScaler>& s) {
    if (!s) return nullptr;
    return {{"mean", io::vector_to_json(s->mean.transpose())}, {"scale", s->scale}};
}

}  // namespace

void cmd_simulate(const PipelineConfig& cfg) {
    const DataSection& d = cfg.data;
    synthdata::SyntheticDataset ds;
    if (d.preset == "trifurcation") {
        synthdata::LineageOptions opt;
        opt.cells = d.cells;
        opt.steps = d.steps;
        opt.timepoints = d.timepoints;
        ds = synthdata::simulate_lineages(synthdata::trifurcation_spec(cfg.seed), opt, derive_seed(cfg.seed, {1}));
    } else if (d.preset == "s_shape") {
        synthdata::SShapeOptions opt;
        opt.simulated_cells = d.simulated_cells;
        opt.kept_cells = d.cells;
        opt.steps = d.steps;
        opt.timepoints = d.timepoints;
        ds = synthdata::s_shape(cfg.seed, opt);
    } else {
        ds = synthdata::toy_set(synthdata::toy_kind_from_string(d.preset), d.cells, d.timepoints, cfg.seed);
    }
    if (d.library_lo != 1.0 || d.library_hi != 1.0 || d.dropout > 0.0 || d.poisson) {
        synthdata::TechnicalNoise noise{d.library_lo, d.library_hi, d.dropout, d.poisson};
        Rng rng(stage_seed(cfg, Stage::Noise));
        ds.expression = synthdata::technical_noise(ds.expression, noise, rng);
    }

    io::write_table(out_path(cfg, files::expression), {io::numbered_header("g", ds.expression.cols()), ds.expression});
    io::Table labels;
    labels.header = {"timepoint", "branch", "state", "time"};
    labels.values.resize(ds.cells(), 4);
    for (Index i = 0; i < ds.cells(); ++i) {
        const auto k = static_cast<std::size_t>(i);
        labels.values.row(i) << static_cast<double>(ds.timepoint[k]), static_cast<double>(ds.branch[k]),
            static_cast<double>(ds.state[k]), ds.time[k];
    }
    io::write_table(out_path(cfg, files::labels), labels);

    json written = {files::expression, files::labels};
    if (d.spatial_layout) {
        // Cells sit on a grid of (timepoint, branch) patches; state doubles as cell type.
        Rng rng(stage_seed(cfg, Stage::Layout));
        io::Table loc;
        loc.header = {"x", "y"};
        loc.values.resize(ds.cells(), 2);
        for (Index i = 0; i < ds.cells(); ++i) {
            const auto k = static_cast<std::size_t>(i);
            loc.values(i, 0) = 10.0 * static_cast<double>(ds.timepoint[k]) + 2.0 * rng.normal();
            loc.values(i, 1) = 10.0 * static_cast<double>(ds.branch[k]) + 2.0 * rng.normal();
        }
        io::write_table(out_path(cfg, files::locations), loc);
        written.push_back(files::locations);
    }
    io::write_json(out_path(cfg, files::manifest), {{"preset", d.preset},
                                                    {"seed", cfg.seed},
                                                    {"cells", ds.cells()},
                                                    {"genes", ds.expression.cols()},
                                                    {"timepoints", ds.n_timepoints},
                                                    {"branches", ds.n_branches},
                                                    {"files", written}});
}

void cmd_embed(const PipelineConfig& cfg) {
    const GeometrySection& g = cfg.geometry;
    const io::Table expr = io::read_table(require_input(cfg, files::expression, "simulate"));
    Matrix x = expr.values;
    if (g.method != "identity" && g.log1p) {
        if (x.minCoeff() < 0.0) fail(ErrorCode::Numeric, "embed: log1p needs nonnegative expression");
        x = x.array().log1p().matrix();
    }
    json meta = {{"method", g.method}, {"seed", cfg.seed}};
    std::optional<geometry::GeoAutoencoder> ae;
    Matrix z;
    if (g.method == "identity") {
        z = x;
    } else {
        Matrix xp = x;
        if (g.pca_dim > 0 && g.pca_dim < x.cols()) xp = pca_fit(x, g.pca_dim).transform(x);
        if (g.method == "pca") {
            require(g.latent_dim <= xp.cols(), "embed: latent_dim exceeds the feature count");
            z = pca_fit(xp, g.latent_dim).transform(xp);
        } else {
            const auto op = geometry::diffusion_operator(xp, g.knn, g.diffusion_t);
            geometry::GagaConfig gc;
            gc.latent_dim = g.latent_dim;
            gc.hidden = g.hidden;
            gc.epochs = g.epochs;
            gc.batch_size = g.batch_size;
            gc.lr = g.lr;
            gc.lambda_geo = g.lambda_geo;
            gc.lambda_rec = g.lambda_rec;
            gc.seed = stage_seed(cfg, Stage::Embed);
            ae = geometry::train_gaga(xp, geometry::potential_distances(op), gc);
            z = geometry::encode(*ae, xp);
        }
    }
    std::optional<LatentScaler> scaler;
    if (g.standardize) {
        scaler = LatentScaler::fit(z);
        z = scaler->transform(z);
    }
    meta["scaler"] = scaler_json(scaler);
    meta["columns"] = z.cols();
    io::write_table(out_path(cfg, files::latent), {io::numbered_header("z", z.cols()), z});
    io::write_json(out_path(cfg, files::embedding), meta);
    if (ae) io::save_autoencoder(out_path(cfg, files::autoencoder), {*ae, meta});
}

void cmd_features(const PipelineConfig& cfg) {
    const io::Table expr = io::read_table(require_input(cfg, files::expression, "simulate"));
    const io::Table loc = io::read_table(require_input(cfg, files::locations, "simulate with data.spatial_layout"));
    const Labels labels = read_labels(cfg);
    if (loc.values.rows() != expr.values.rows() || labels.cells() != expr.values.rows())
        fail(ErrorCode::ShapeMismatch, "features: expression, locations and labels differ in row count");
    if (loc.values.cols() != 2) fail(ErrorCode::ShapeMismatch, "features: locations need two columns");
    spatial::SpatialDataset data;
    data.expression = expr.values;
    data.locations = loc.values;
    data.cell_types = labels.state;
    data.n_types = *std::max_element(labels.state.begin(), labels.state.end()) + 1;
    for (const auto& [l, r] : cfg.spatial.lr_pairs)
        if (l >= data.expression.cols() || r >= data.expression.cols())
            fail(ErrorCode::Config, "spatial.lr_pairs: gene index out of range");
    data.lr_pairs = cfg.spatial.lr_pairs;
    spatial::SpatialConfig sc;
    sc.k = cfg.spatial.k;
    sc.hops = cfg.spatial.hops;
    sc.max_dist = cfg.spatial.max_dist;
    sc.expression_pca_dim = std::min(cfg.spatial.expression_pca_dim, data.expression.cols());
    sc.output_dim = cfg.spatial.output_dim;
    const auto f = spatial::assemble_spatial_features(data, sc);
    io::write_table(out_path(cfg, files::features), {io::numbered_header("s", f.S.cols()), f.S});
}

void cmd_train(const PipelineConfig& cfg) {
    const Labels labels = read_labels(cfg);
    const auto rows = rows_by_timepoint(labels);
    const Matrix z = dynamics_input(cfg, labels.cells());
    const auto times = unit_times(labels.timepoints);

    dynamics::DynamicsConfig dc = cfg.dynamics;
    dc.latent_dim = z.cols();
    dc.seed = stage_seed(cfg, Stage::Train);
    training::TrainConfig tc = cfg.training;
    tc.seed = derive_seed(dc.seed, {1});
    const auto res = training::train(dynamics::make_dynamics_model(dc), split(z, rows), times, tc);

    json meta = {{"train_mode", training::to_string(tc.mode)},
                 {"solver", dynamics::to_string(dc.mode)},
                 {"growth", tc.growth_enabled},
                 {"spatial", cfg.spatial.enabled},
                 {"steps_per_unit", tc.steps_per_unit},
                 {"timepoints", labels.timepoints},
                 {"h_margin", res.h_margin},
                 {"seed", cfg.seed}};
    io::save_dynamics(out_path(cfg, files::model), {res.model, meta});

    io::Table loss;
    loss.header = {"iteration", "total", "marginal", "energy", "density"};
    loss.values.resize(static_cast<Index>(res.history.size()), 5);
    for (std::size_t i = 0; i < res.history.size(); ++i) {
        const auto& h = res.history[i];
        loss.values.row(static_cast<Index>(i)) << static_cast<double>(i + 1), h.total, h.marginal, h.energy, h.density;
    }
    io::write_table(out_path(cfg, files::loss), loss);
}

void cmd_infer(const PipelineConfig& cfg) {
    const auto ckpt = io::load_dynamics(require_input(cfg, files::model, "train"));
    const Labels labels = read_labels(cfg);
    const auto rows = rows_by_timepoint(labels);
    const Matrix z = dynamics_input(cfg, labels.cells());
    if (z.cols() != ckpt.model.latent_dim())
        fail(ErrorCode::ShapeMismatch, "infer: model expects " + std::to_string(ckpt.model.latent_dim()) +
                                           " latent columns, data has " + std::to_string(z.cols()));
    const bool growth = ckpt.meta.value("growth", false);
    const Index spu = ckpt.meta.value("steps_per_unit", cfg.training.steps_per_unit);
    const auto r = training::rollout(ckpt.model, z(rows[0], Eigen::all), unit_times(labels.timepoints), spu, growth,
                                     stage_seed(cfg, Stage::Infer));
    const Index K = std::min(cfg.eval.branches, r.cells());
    const auto summary = eval::branch_means(r.states, K, stage_seed(cfg, Stage::Infer));
    io::write_trajectories(out_path(cfg, files::trajectories), io::records_from_rollout(r, &summary.assignment));
}

void cmd_evaluate(const PipelineConfig& cfg) {
    const auto records = io::read_trajectories(require_input(cfg, files::trajectories, "infer"));
    if (records.empty()) fail(ErrorCode::Format, "evaluate: trajectory file is empty");
    const Labels labels = read_labels(cfg);
    const auto rows = rows_by_timepoint(labels);
    const Matrix z = dynamics_input(cfg, labels.cells());
    const auto snaps = split(z, rows);
    const auto states = io::states_from_records(records);
    if (states.front().cols() != z.cols()) fail(ErrorCode::ShapeMismatch, "evaluate: trajectories and latents differ in dimension");
    const std::vector<double>& grid = records.front().times;
    const std::uint64_t seed = stage_seed(cfg, Stage::Evaluate);

    eval::MetricTable table;
    auto add = [&](const eval::MetricTable& rows_in, const std::string& prefix) {
        for (auto row : rows_in) {
            row.metric = prefix + row.metric;
            table.push_back(row);
        }
    };
    for (Index t = 1; t < labels.timepoints; ++t) {
        std::size_t k = 0;
        while (k < grid.size() && std::abs(grid[k] - static_cast<double>(t)) > 1e-6) ++k;
        if (k == grid.size()) fail(ErrorCode::Format, "evaluate: trajectories do not reach timepoint " + std::to_string(t));
        const Matrix& pred = states[k];
        Vector mass(static_cast<Index>(records.size()));
        for (std::size_t i = 0; i < records.size(); ++i) mass[static_cast<Index>(i)] = records[i].mass[k];
        const Matrix& obs = snaps[static_cast<std::size_t>(t)];
        eval::MetricTable m = eval::distribution_metrics(t, pred, obs, seed, cfg.eval.w1_cap);
        m[0].value = eval::w1(pred, mass, obs, Vector::Ones(obs.rows()), cfg.eval.w1_cap, seed);
        add(m, "");
        add(eval::distribution_metrics(t, snaps[static_cast<std::size_t>(t - 1)], obs, seed, cfg.eval.w1_cap), "identity_");
    }

    const Index K = std::min(cfg.eval.branches, static_cast<Index>(records.size()));
    const auto model_branches = eval::branch_means(states, K, seed);
    const auto err = eval::trajectory_error(z, model_branches);
    const auto line = eval::straight_line_baseline(snaps.front(), snaps.back(), static_cast<Index>(states.size()) - 1);
    const auto line_err = eval::trajectory_error(z, eval::branch_means(line, std::min(K, snaps.front().rows()), seed));
    table.push_back({-1, "traj_err_mean", err.mean, seed});
    table.push_back({-1, "traj_err_std", err.std, seed});
    table.push_back({-1, "line_traj_err_mean", line_err.mean, seed});
    table.push_back({-1, "line_traj_err_std", line_err.std, seed});
    const auto shares = model_branches.shares();
    for (std::size_t b = 0; b < shares.size(); ++b)
        table.push_back({-1, "branch_share_" + std::to_string(b), shares[b], seed});

    if (cfg.eval.loo) {
        eval::LooConfig lc;
        lc.model = cfg.dynamics;
        lc.model.latent_dim = z.cols();
        lc.model.seed = derive_seed(seed, {1});
        lc.train = cfg.training;
        lc.train.seed = derive_seed(seed, {2});
        lc.w1_cap = cfg.eval.w1_cap;
        add(eval::leave_one_out(snaps, unit_times(labels.timepoints), lc), "loo_");
    }

    std::string csv = "t,metric,value,seed\n";
    for (const auto& row : table)
        csv += std::to_string(row.t) + "," + row.metric + "," + io::format_number(row.value) + "," +
               std::to_string(row.seed) + "\n";
    io::write_text(out_path(cfg, files::metrics), csv);
}

void cmd_plot(const PipelineConfig& cfg) {
    const fs::path lat = out_path(cfg, files::latent), traj = out_path(cfg, files::trajectories);
    if (!fs::exists(lat) && !fs::exists(traj))
        fail(ErrorCode::MissingInput, "plot: neither " + lat.string() + " nor " + traj.string() + " exists");
    Matrix points(0, 2);
    std::vector<Index> tp;
    if (fs::exists(lat)) {
        const Labels labels = read_labels(cfg);
        points = dynamics_input(cfg, labels.cells());
        tp = labels.timepoint;
    }
    std::vector<Matrix> paths;
    if (fs::exists(traj))
        for (const auto& rec : io::read_trajectories(traj)) paths.push_back(rec.path);
    io::PlotOptions opt;
    opt.width = cfg.output.plot_width;
    opt.height = cfg.output.plot_height;
    opt.title = cfg.data.preset + ", seed " + std::to_string(cfg.seed);
    io::write_text(out_path(cfg, files::plot), io::render_svg(points, tp, paths, opt));
}

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"simulate", "embed", "features", "train", "infer", "evaluate", "plot"};
    return names;
}

void run_command(const std::string& name, const PipelineConfig& cfg) {
    static const std::map<std::string, std::function<void(const PipelineConfig&)>> table{
        {"simulate", cmd_simulate}, {"embed", cmd_embed}, {"features", cmd_features}, {"train", cmd_train},
        {"infer", cmd_infer},       {"evaluate", cmd_evaluate}, {"plot", cmd_plot}};
    const auto it = table.find(name);
    if (it == table.end()) fail(ErrorCode::Config, "unknown command '" + name + "'");
    it->second(cfg);
    io::write_json(fs::path(cfg.output.dir) / ("config." + name + ".json"), to_json(cfg));
}

int exit_code(ErrorCode code) {
    switch (code) {
        case ErrorCode::Config:
        case ErrorCode::InvalidArgument: return 2;
        case ErrorCode::MissingInput: return 3;
        case ErrorCode::Numeric: return 4;
        case ErrorCode::ShapeMismatch: return 5;
        case ErrorCode::VersionMismatch: return 6;
        case ErrorCode::Format: return 7;
    }
    return 1;
}

}  // namespace cellflow::cli
