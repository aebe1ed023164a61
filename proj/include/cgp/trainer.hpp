#ifndef CGP_TRAINER_HPP
#define CGP_TRAINER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "cgp/data.hpp"
#include "cgp/eval.hpp"
#include "cgp/network.hpp"
#include "cgp/subspace.hpp"

namespace cgp {

enum class Baseline { cgp, finetune, task_level, multitask };

struct TrainConfig {
    double alpha = 0.05;       // learning rate
    int epochs = 5;            // per task
    int batch_size = 16;
    double lambda = 0.1;       // contrastive weight
    double mu = 0.1;           // contrastive temperature
    double eta = 0.7;          // prototype similarity threshold
    double eps = 0.95;         // k-rank energy threshold
    int n_r = 16;              // representation samples per class
    RepresentationMode mode = RepresentationMode::br_gtl;
    std::uint64_t seed = 0;
    Baseline baseline = Baseline::cgp;
    double aug_noise = 0.05;         // additive Gaussian sigma
    double aug_scale_jitter = 0.05;  // per-feature multiplicative jitter

    void validate() const;
};

// One augmented view appended per source row; pairing[i] is the positive
// partner index and is a fixed-point-free involution.
struct AugmentedBatch {
    Matrix data;
    std::vector<int> pairing;
};

AugmentedBatch augment(const Matrix& batch, double noise, double scale_jitter,
                       std::uint64_t seed);

// Per layer: grad <- grad - grad * S * S^T; empty layers and head gradients
// are left alone.
Gradients project_gradients(Gradients grads, const BasisMemory& mem);

struct ClassConsolidation {
    int class_id = 0;
    MergeBranch branch = MergeBranch::fresh;
    int matched_class = -1;
    double max_similarity = -2.0;
    int new_columns = 0;
    int shared_columns = 0;
};

struct ConsolidationReport {
    std::vector<ClassConsolidation> classes;
    bool saturated = false;
    double ortho_defect = 0.0;  // worst layer defect after the pass
};

struct TaskResult {
    int task = 0;
    double final_loss = 0.0;
    std::vector<double> epoch_losses;
    double wall_seconds = 0.0;            // reporting only, never in CSVs
    double max_update_alignment = 0.0;    // max |alpha * grad * S|_max over steps
    ConsolidationReport consolidation;
    std::vector<int> memory_columns;      // per layer, after consolidation
};

// Algorithm core: epochs of sample -> augment -> forward -> compound loss ->
// backward -> project -> update. finetune and multitask skip the projection.
TaskResult train_task(Network& net, const TaskData& task, const BasisMemory& mem,
                      const TrainConfig& config);

// Extracts one representation per class (or one per task for the task_level
// baseline) and feeds it to the similarity-gated basis construction.
ConsolidationReport consolidate_task(const Network& net, const TaskData& task, BasisMemory& mem,
                                     PrototypeMemory& protos, const TrainConfig& config,
                                     bool first_task);

struct RunResult {
    AccuracyMatrix accuracy;
    std::vector<TaskResult> tasks;
    BasisMemory memory;
    PrototypeMemory prototypes;
    Network net;
    double max_update_alignment = 0.0;  // worst over the whole run
    double max_ortho_defect = 0.0;      // worst post-consolidation defect
};

// Trains the stream in order, consolidating and evaluating all seen tasks
// after each one. The multitask baseline instead trains jointly and reports
// its final accuracies in every row.
RunResult run_sequence(const NetworkConfig& net_config, const TrainConfig& train_config,
                       const TaskStream& stream);

}  // namespace cgp

#endif
