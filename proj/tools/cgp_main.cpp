#include <CLI11.hpp>
#include <cstdint>
#include <optional>
#include <string>

#include "cgp/cli.hpp"
#include "cgp/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Class-gradient-projection continual learning lab"};
    app.set_version_flag("--version", std::string(cgp::kVersion));
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir;
    std::uint64_t seed_value = 0;
    bool seed_given = false;
    int verbosity = 1;
    bool quiet = false;

    CLI::App* run = app.add_subcommand("run", "run the configured experiment for every seed");
    run->add_option("config", config_path, "JSON config file")->required();
    run->add_option("-o,--output-dir", output_dir, "artifact directory (overrides the config)");
    run->add_option("--seed", seed_value, "replace the config's seed list with one seed")
        ->each([&](const std::string&) { seed_given = true; });
    run->add_flag("-q,--quiet", quiet, "suppress progress output");

    std::string axis;
    CLI::App* ablate = app.add_subcommand("ablate", "sweep one ablation axis over the config");
    ablate->add_option("config", config_path, "JSON config file")->required();
    ablate->add_option("axis", axis, "components | eta | lambda | n_r")->required();
    ablate->add_option("-o,--output-dir", output_dir, "artifact directory");
    ablate->add_flag("-q,--quiet", quiet, "suppress progress output");

    std::string snapshot_path;
    bool as_csv = false;
    CLI::App* inspect = app.add_subcommand("inspect", "report a memory snapshot");
    inspect->add_option("snapshot", snapshot_path, "memory snapshot file")->required();
    inspect->add_flag("--csv", as_csv, "emit CSV instead of a text report");

    CLI11_PARSE(app, argc, argv);
    if (quiet) verbosity = 0;

    if (run->parsed())
        return cgp::cli::cmd_run(config_path, output_dir,
                                 seed_given ? std::optional<std::uint64_t>(seed_value)
                                            : std::nullopt,
                                 verbosity);
    if (ablate->parsed()) return cgp::cli::cmd_ablate(config_path, axis, output_dir, verbosity);
    if (inspect->parsed()) return cgp::cli::cmd_inspect(snapshot_path, as_csv);
    return cgp::cli::kExitConfig;
}
