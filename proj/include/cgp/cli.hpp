#ifndef CGP_CLI_HPP
#define CGP_CLI_HPP

#include <cstdint>
#include <optional>
#include <string>

namespace cgp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

// Runs the configured experiment for every seed, writing accuracy/loss/stats
// CSVs, memory and network snapshots, a manifest and an accuracy plot.
int cmd_run(const std::string& config_path, const std::string& output_dir_override,
            std::optional<std::uint64_t> seed_override, int verbosity);

// Sweeps one ablation axis (components | eta | lambda | n_r) over the base
// config and writes a per-variant summary CSV plus per-run artifacts.
int cmd_ablate(const std::string& config_path, const std::string& axis,
               const std::string& output_dir_override, int verbosity);

// Prints a per-layer report of a memory snapshot (text, or CSV with as_csv).
int cmd_inspect(const std::string& snapshot_path, bool as_csv);

}  // namespace cgp::cli

#endif
