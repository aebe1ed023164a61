#ifndef CGP_CONFIG_HPP
#define CGP_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "cgp/data.hpp"
#include "cgp/network.hpp"
#include "cgp/trainer.hpp"

namespace cgp {

struct DataConfig {
    enum class Kind { synthetic, idx };
    Kind kind = Kind::synthetic;

    SyntheticSpec synthetic;  // seed filled in per run seed

    // idx split settings
    std::string train_images, train_labels, test_images, test_labels;
    int classes_per_task = 2;
    std::uint64_t permutation_seed = 0;  // 0 keeps the natural class order
};

// Everything one experiment needs: network shape, data source, training
// hyperparameters and the seeds to repeat over. Parsed from a strict JSON
// file; unknown keys are hard errors.
struct RunConfig {
    std::string name = "run";
    std::vector<std::uint64_t> seeds{1};
    std::string output_dir;  // optional, CLI flag wins
    std::vector<int> layer_sizes{16, 32, 8};
    DataConfig data;
    TrainConfig train;

    void validate() const;
};

RunConfig parse_run_config(const std::string& path);
RunConfig parse_run_config_text(const std::string& text, const std::string& origin);

// Config echo for the run manifest; parsing it again reproduces the run.
std::string run_config_to_json(const RunConfig& config);

// Stream construction for one master seed (derives the data seed).
TaskStream build_stream(const DataConfig& data, std::uint64_t run_seed);

// Seed derivation for the run's components.
std::uint64_t derive_network_seed(std::uint64_t run_seed);
std::uint64_t derive_data_seed(std::uint64_t run_seed);
std::uint64_t derive_train_seed(std::uint64_t run_seed);

const char* baseline_name(Baseline b);
const char* mode_name(RepresentationMode m);

}  // namespace cgp

#endif
