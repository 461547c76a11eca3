#include "doctest.h"

#include "../support/oracles.hpp"
#include "cellflow/dynamics/model.hpp"
#include "cellflow/error.hpp"
#include "cellflow/io/checkpoint.hpp"
#include "cellflow/io/csv.hpp"
#include "cellflow/io/svg.hpp"
#include "cellflow/io/trajectories.hpp"

#include <filesystem>
#include <fstream>

using namespace cellflow;
using namespace cellflow::io;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "cellflow_io_tests";
    fs::create_directories(dir);
    return dir / name;
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::InvalidArgument;
}

// Minimal well-formedness check: balanced tags, quoted attributes.
bool balanced_xml(const std::string& s) {
    std::vector<std::string> stack;
    std::size_t i = 0;
    while ((i = s.find('<', i)) != std::string::npos) {
        const std::size_t j = s.find('>', i);
        if (j == std::string::npos) return false;
        std::string tag = s.substr(i + 1, j - i - 1);
        i = j + 1;
        if (tag.empty()) return false;
        if (tag[0] == '?' || tag[0] == '!') continue;
        if (std::count(tag.begin(), tag.end(), '"') % 2) return false;
        if (tag[0] == '/') {
            if (stack.empty() || stack.back() != tag.substr(1)) return false;
            stack.pop_back();
        } else if (tag.back() != '/') {
            stack.push_back(tag.substr(0, tag.find(' ')));
        }
    }
    return stack.empty();
}

std::size_t count(const std::string& s, const std::string& needle) {
    std::size_t n = 0;
    for (std::size_t i = s.find(needle); i != std::string::npos; i = s.find(needle, i + 1)) ++n;
    return n;
}

}  // namespace

TEST_CASE("csv round trip is exact and rewriting is byte-identical") {
    Rng r(1);
    Table t;
    t.header = {"a", "b", "c"};
    t.values = oracle::random_matrix(40, 3, r, -1e3, 1e3);
    t.values(0, 0) = 1e-300;
    t.values(1, 1) = -0.1;
    t.values(2, 2) = 0.0;
    t.values(3, 0) = 123456789.0;
    const auto p = scratch("t.csv");
    write_table(p, t);
    const Table back = read_table(p);
    CHECK(back.header == t.header);
    CHECK(back.values == t.values);
    const std::string first = read_text(p);
    write_table(p, back);
    CHECK(read_text(p) == first);
    CHECK(first.substr(0, 6) == "a,b,c\n");
    CHECK(back.column("b") == 1);
    CHECK(code_of([&] { (void)back.column("zz"); }) == ErrorCode::Format);
}

TEST_CASE("csv errors map to distinct codes") {
    CHECK(code_of([] { read_table(scratch("absent.csv")); }) == ErrorCode::MissingInput);
    write_text(scratch("ragged.csv"), "a,b\n1,2\n3\n");
    CHECK(code_of([] { read_table(scratch("ragged.csv")); }) == ErrorCode::Format);
    write_text(scratch("word.csv"), "a\nhello\n");
    CHECK(code_of([] { read_table(scratch("word.csv")); }) == ErrorCode::Format);
    Table bad;
    bad.header = {"x"};
    bad.values = Matrix::Zero(1, 2);
    CHECK(code_of([&] { write_table(scratch("bad.csv"), bad); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("dynamics checkpoint round trip preserves every output") {
    dynamics::DynamicsConfig cfg;
    cfg.latent_dim = 3;
    cfg.hidden = {8, 8};
    cfg.mode = dynamics::SolverMode::Sde;
    cfg.beta = 0.3;
    cfg.seed = 5;
    const auto m = dynamics::make_dynamics_model(cfg);
    const auto p = scratch("dyn.json");
    save_dynamics(p, {m, {{"train_mode", "global"}}});
    const auto back = load_dynamics(p);
    CHECK(back.model.drift.parameters() == m.drift.parameters());
    CHECK(back.model.diffusion.parameters() == m.diffusion.parameters());
    CHECK(back.model.growth.parameters() == m.growth.parameters());
    CHECK(back.model.mode == m.mode);
    CHECK(back.model.beta == m.beta);
    CHECK(back.meta["train_mode"] == "global");
    const std::string first = read_text(p);
    save_dynamics(p, back);
    CHECK(read_text(p) == first);

    auto doc = read_json(p);
    doc["version"] = kCheckpointVersion + 1;
    write_json(p, doc);
    CHECK(code_of([&] { load_dynamics(p); }) == ErrorCode::VersionMismatch);
    doc["version"] = kCheckpointVersion;
    doc["format"] = "something-else";
    write_json(p, doc);
    CHECK(code_of([&] { load_dynamics(p); }) == ErrorCode::Format);
    write_text(p, "{not json");
    CHECK(code_of([&] { load_dynamics(p); }) == ErrorCode::Format);
}

TEST_CASE("autoencoder checkpoint round trip") {
    Rng r(3);
    geometry::GeoAutoencoder ae;
    ae.encoder = Mlp::glorot({4, 6, 2}, Activation::Tanh, Activation::Identity, r);
    ae.decoder = Mlp::glorot({2, 6, 4}, Activation::Tanh, Activation::Identity, r);
    ae.input_mean = Vector::LinSpaced(4, -1, 1);
    ae.input_scale = 2.5;
    ae.distance_scale = 0.7;
    ae.loss_history = {3.0, 2.0};
    const auto p = scratch("ae.json");
    save_autoencoder(p, {ae, {}});
    const auto back = load_autoencoder(p).model;
    const Matrix x = oracle::random_matrix(5, 4, r);
    CHECK(geometry::encode(back, x) == geometry::encode(ae, x));
    CHECK(back.loss_history == ae.loss_history);
    CHECK(code_of([&] { load_dynamics(p); }) == ErrorCode::Format);
}

TEST_CASE("trajectory JSON lines round trip") {
    Rng r(4);
    std::vector<TrajectoryRecord> recs(3);
    for (Index i = 0; i < 3; ++i) {
        recs[i].cell_id = i;
        if (i != 1) recs[i].branch = i % 2;
        recs[i].times = {0.0, 0.5, 1.0};
        recs[i].path = oracle::random_matrix(3, 2, r);
        recs[i].mass = {1.0, 1.0, 0.8};
    }
    const auto p = scratch("traj.jsonl");
    write_trajectories(p, recs);
    const auto back = read_trajectories(p);
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back[i].path == recs[i].path);
        CHECK(back[i].branch == recs[i].branch);
        CHECK(back[i].mass == recs[i].mass);
    }
    CHECK(to_jsonl(back) == read_text(p));
    const auto states = states_from_records(back);
    REQUIRE(states.size() == 3);
    CHECK(states[2].row(1) == recs[1].path.row(2));

    write_text(p, "");
    CHECK(read_trajectories(p).empty());
    write_text(p, "{\"cell_id\": 0, \"times\": [0], \"path\": [[1, 2]], \"mass\": [1, 1]}\n");
    CHECK(code_of([&] { read_trajectories(p); }) == ErrorCode::Format);
}

TEST_CASE("svg: well formed, one polyline per path, deterministic") {
    Rng r(5);
    const Matrix pts = oracle::random_matrix(30, 2, r);
    std::vector<Index> tp;
    for (Index i = 0; i < 30; ++i) tp.push_back(i % 3);
    std::vector<Matrix> paths{oracle::random_matrix(5, 2, r), oracle::random_matrix(5, 2, r)};
    PlotOptions opt;
    opt.title = "a < b & c";
    const std::string svg = render_svg(pts, tp, paths, opt);
    CHECK(balanced_xml(svg));
    CHECK(count(svg, "<polyline") == 2);
    CHECK(count(svg, "<circle") == 30);
    CHECK(svg == render_svg(pts, tp, paths, opt));

    const std::string scatter = render_svg(pts, tp, {});
    CHECK(balanced_xml(scatter));
    CHECK(count(scatter, "<polyline") == 0);
    CHECK(code_of([&] { render_svg(pts, {0, 1}, {}); }) == ErrorCode::ShapeMismatch);
}
