#include "doctest.h"

#include "cellflow/cli/commands.hpp"
#include "cellflow/cli/config.hpp"
#include "cellflow/error.hpp"
#include "cellflow/io/checkpoint.hpp"
#include "cellflow/io/csv.hpp"
#include "cellflow/io/trajectories.hpp"

#include <cstdlib>
#include <filesystem>
#include <map>
#include <set>
#include <sys/wait.h>

using namespace cellflow;
using namespace cellflow::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / "cellflow_cli_tests" / name;
    fs::remove_all(d);
    return d;
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

PipelineConfig arc_config(const fs::path& dir) {
    auto c = parse_config(json::parse(R"({
        "seed": 11,
        "data": {"preset": "arc", "cells": 40, "timepoints": 4, "spatial_layout": true},
        "geometry": {"method": "identity"},
        "spatial": {"output_dim": 3},
        "training": {"iterations": 20, "lr": 3e-3},
        "eval": {"branches": 1}
    })"));
    c.output.dir = dir.string();
    return c;
}

std::map<std::string, std::string> snapshot_dir(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = io::read_text(e.path());
    return out;
}

std::size_t count(const std::string& s, const std::string& needle) {
    std::size_t n = 0;
    for (std::size_t i = s.find(needle); i != std::string::npos; i = s.find(needle, i + 1)) ++n;
    return n;
}

int run_binary(const std::string& args) {
    const std::string cmd = std::string(CELLFLOW_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("config") {
    TEST_CASE("defaults are echoed and parse back unchanged") {
        const auto cfg = parse_config(json{{"seed", 3}});
        const json echo = to_json(cfg);
        for (const char* s : {"data", "geometry", "spatial", "dynamics", "training", "eval", "output"})
            CHECK(echo.contains(s));
        CHECK(echo["training"]["uot"]["lambda_target"] == 100.0);
        CHECK(echo["training"]["h_margin"].is_null());
        CHECK(to_json(parse_config(echo)) == echo);
    }

    TEST_CASE("preset defaults resolve") {
        CHECK(parse_config(json{{"seed", 1}, {"data", {{"preset", "trifurcation"}}}}).data.cells == 500);
        CHECK(parse_config(json{{"seed", 1}, {"data", {{"preset", "s_shape"}}}}).data.cells == 315);
        CHECK(parse_config(json{{"seed", 1}, {"data", {{"preset", "s_shape"}}}}).data.steps == 50);
        CHECK(parse_config(json{{"seed", 1}, {"data", {{"preset", "arc"}, {"cells", 7}}}}).data.cells == 7);
    }

    TEST_CASE("rejections") {
        auto bad = [](const json& j) { return code_of([&] { parse_config(j); }); };
        CHECK(bad(json{{"data", json::object()}}) == ErrorCode::Config);
        CHECK(bad(json{{"seed", 1}, {"extra", 1}}) == ErrorCode::Config);
        CHECK(bad(json{{"seed", 1}, {"training", {{"uot", {{"epsilon", 1}}}}}}) == ErrorCode::Config);
        CHECK(bad(json{{"seed", 1}, {"training", {{"iterations", 1.5}}}}) == ErrorCode::Config);
        CHECK(bad(json{{"seed", 1}, {"training", {{"mode", "sideways"}}}}) == ErrorCode::Config);
        CHECK(bad(json{{"seed", -1}}) == ErrorCode::Config);
        CHECK(bad(json{{"seed", 1}, {"data", {{"preset", "spiral"}}}}) == ErrorCode::Config);
        CHECK(bad(json{{"seed", 1}, {"spatial", {{"lr_pairs", {{1, 2, 3}}}}}}) == ErrorCode::Config);
        CHECK(bad(json{{"seed", 1}, {"geometry", {{"standardize", 1}}}}) == ErrorCode::Config);
    }

    TEST_CASE("exit codes are distinct per failure class") {
        std::set<int> codes;
        for (ErrorCode c : {ErrorCode::Config, ErrorCode::MissingInput, ErrorCode::Numeric, ErrorCode::ShapeMismatch,
                            ErrorCode::VersionMismatch, ErrorCode::Format})
            codes.insert(exit_code(c));
        CHECK(codes.size() == 6);
        CHECK(!codes.count(0));
        CHECK(exit_code(ErrorCode::Config) == 2);
        CHECK(exit_code(ErrorCode::MissingInput) == 3);
        CHECK(exit_code(ErrorCode::Numeric) == 4);
    }
}

TEST_SUITE("pipeline") {
    TEST_CASE("arc pipeline end to end, byte-identical on rerun") {
        const fs::path dir = fresh_dir("arc");
        auto cfg = arc_config(dir);
        cfg.spatial.enabled = true;
        for (const auto& name : command_names()) run_command(name, cfg);
        const auto first = snapshot_dir(dir);
        for (const char* f : {files::expression, files::labels, files::manifest, files::locations, files::latent,
                              files::features, files::model, files::loss, files::trajectories, files::metrics,
                              files::plot})
            CHECK_MESSAGE(first.count(f), f);
        for (const auto& name : command_names()) CHECK(first.count("config." + name + ".json"));

        const std::string metrics = first.at(files::metrics);
        CHECK(metrics.rfind("t,metric,value,seed\n", 0) == 0);
        CHECK(count(metrics, "\n") > 10);
        CHECK(count(metrics, ",w1,") == 3);

        const auto records = io::read_trajectories(dir / files::trajectories);
        CHECK(records.size() == 40);
        CHECK(count(first.at(files::plot), "<polyline") == records.size());

        const auto ckpt = io::load_dynamics(dir / files::model);
        CHECK(ckpt.meta["train_mode"] == "local");
        CHECK(ckpt.model.latent_dim() == 5);

        for (const auto& name : command_names()) run_command(name, cfg);
        CHECK(snapshot_dir(dir) == first);
    }

    TEST_CASE("train mode is recorded, infer is deterministic") {
        const fs::path dir = fresh_dir("modes");
        auto cfg = arc_config(dir);
        for (const char* name : {"simulate", "embed"}) run_command(name, cfg);
        cfg.training.mode = training::TrainMode::Global;
        run_command("train", cfg);
        CHECK(io::load_dynamics(dir / files::model).meta["train_mode"] == "global");
        run_command("infer", cfg);
        const std::string a = io::read_text(dir / files::trajectories);
        run_command("infer", cfg);
        CHECK(io::read_text(dir / files::trajectories) == a);
    }

    TEST_CASE("trifurcation preset writes 500 x 100 expression") {
        const fs::path dir = fresh_dir("tri");
        auto cfg = parse_config(json{{"seed", 1}, {"data", {{"preset", "trifurcation"}}}});
        cfg.output.dir = dir.string();
        run_command("simulate", cfg);
        const auto t = io::read_table(dir / files::expression);
        CHECK(t.values.rows() == 500);
        CHECK(t.values.cols() == 100);
        CHECK(io::read_json(dir / files::manifest)["branches"] == 3);
    }

    TEST_CASE("stage failures carry their codes") {
        const fs::path dir = fresh_dir("errors");
        auto cfg = arc_config(dir);
        CHECK(code_of([&] { run_command("train", cfg); }) == ErrorCode::MissingInput);
        CHECK(code_of([&] { run_command("plot", cfg); }) == ErrorCode::MissingInput);
        CHECK(code_of([&] { run_command("launch", cfg); }) == ErrorCode::Config);
        for (const char* name : {"simulate", "embed", "train"}) run_command(name, cfg);

        auto doc = io::read_json(dir / files::model);
        doc["version"] = io::kCheckpointVersion + 1;
        io::write_json(dir / files::model, doc);
        CHECK(code_of([&] { run_command("infer", cfg); }) == ErrorCode::VersionMismatch);

        io::write_text(dir / files::latent, "z0\n1\n");
        CHECK(code_of([&] { run_command("train", cfg); }) == ErrorCode::ShapeMismatch);

        cfg.spatial.enabled = true;
        io::write_text(dir / files::latent, "z0\n");
        fs::remove(dir / files::locations);
        CHECK(code_of([&] { run_command("features", cfg); }) == ErrorCode::MissingInput);
    }

    TEST_CASE("plot with an empty trajectory file is scatter only") {
        const fs::path dir = fresh_dir("plot");
        auto cfg = arc_config(dir);
        for (const char* name : {"simulate", "embed"}) run_command(name, cfg);
        io::write_text(dir / files::trajectories, "");
        run_command("plot", cfg);
        const std::string svg = io::read_text(dir / files::plot);
        CHECK(count(svg, "<polyline") == 0);
        CHECK(count(svg, "<circle") == 160);
    }

    TEST_CASE("missing output directories are created") {
        const fs::path dir = fresh_dir("nested") / "a" / "b";
        auto cfg = arc_config(dir);
        run_command("simulate", cfg);
        CHECK(fs::exists(dir / files::expression));
    }
}

TEST_CASE("binary maps failures to exit codes") {
    const fs::path dir = fresh_dir("binary");
    fs::create_directories(dir);
    io::write_text(dir / "ok.json", R"({"seed": 2, "data": {"preset": "arc", "cells": 10, "timepoints": 3}})");
    io::write_text(dir / "unknown.json", R"({"seed": 2, "colour": "red"})");
    io::write_text(dir / "broken.json", "{");
    CHECK(run_binary("simulate --config " + (dir / "ok.json").string() + " --out " + (dir / "out").string()) == 0);
    CHECK(fs::exists(dir / "out" / files::expression));
    CHECK(run_binary("simulate --config " + (dir / "unknown.json").string()) == 2);
    CHECK(run_binary("simulate --config " + (dir / "broken.json").string()) == 2);
    CHECK(run_binary("simulate --config " + (dir / "absent.json").string()) == 3);
    CHECK(run_binary("train --config " + (dir / "ok.json").string() + " --out " + (dir / "empty").string()) == 3);
    CHECK(run_binary("") == 2);
}
