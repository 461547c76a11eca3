#include "cellflow/cli/commands.hpp"
#include "cellflow/cli/config.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

int main(int argc, char** argv) {
    using namespace cellflow;

    CLI::App app{"cellflow: trajectory inference between population snapshots"};
    app.require_subcommand(1, 1);
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;

    for (const std::string& name : cli::command_names()) {
        CLI::App* sub = app.add_subcommand(name, "run the " + name + " stage");
        sub->add_option("--config", config_path, "pipeline config (JSON)")->required();
        sub->add_option("--seed", seed, "overrides the config seed");
        sub->add_option("--out", out, "overrides output.dir");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        cli::PipelineConfig cfg = cli::load_config(config_path);
        if (seed) cfg.seed = *seed;
        if (out) cfg.output.dir = *out;
        cli::run_command(name, cfg);
    } catch (const Error& e) {
        std::fprintf(stderr, "cellflow %s: %s\n", name.c_str(), e.what());
        return cli::exit_code(e.code());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "cellflow %s: %s\n", name.c_str(), e.what());
        return 1;
    }
    return 0;
}
