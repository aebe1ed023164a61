#ifndef CGP_DATA_HPP
#define CGP_DATA_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "cgp/matrix.hpp"

namespace cgp {

struct TaskData {
    int task_id = 0;
    Matrix train_x;
    std::vector<int> train_y;  // within-task labels 0..classes_per_task-1
    Matrix test_x;
    std::vector<int> test_y;
    std::vector<int> class_ids;  // global class ids, indexed by within-task label
};

struct TaskStream {
    std::vector<TaskData> tasks;
    int input_dim = 0;
    int classes_per_task = 0;

    int num_tasks() const { return static_cast<int>(tasks.size()); }
};

// Desk-scale class-cluster generator. Every class owns a disjoint coordinate
// block of subspace_dim dimensions plus a shared block reused across tasks by
// within-task class index; rho blends between them: rho = 0 gives mutually
// orthogonal class subspaces, rho = 1 fully shared ones.
struct SyntheticSpec {
    int num_tasks = 2;
    int classes_per_task = 2;
    int input_dim = 16;
    int train_per_class = 32;
    int test_per_class = 16;
    int subspace_dim = 3;
    double mean_scale = 1.0;
    double noise = 0.3;
    double rho = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

TaskStream generate_synthetic(const SyntheticSpec& spec);

// ---- IDX (MNIST-style) files ------------------------------------------------

struct IdxData {
    Matrix images;            // one row per image, pixels scaled to [0, 1]
    std::vector<int> labels;  // global class ids
    int image_rows = 0;
    int image_cols = 0;
};

// Parses big-endian IDX pairs: magic 0x00000803 for images, 0x00000801 for
// labels. Wrong magic, truncation and image/label count mismatch raise
// distinct io_error kinds.
IdxData load_idx(const std::string& images_path, const std::string& labels_path);

// Writes raw pixel bytes / labels in the same format (fixtures, round trips).
void write_idx(const std::string& images_path, const std::string& labels_path,
               const std::vector<std::uint8_t>& pixels, int count, int rows, int cols,
               const std::vector<std::uint8_t>& labels);

// Partitions a labeled dataset into tasks of classes_per_task classes each.
// permutation_seed 0 keeps the natural class order, any other value shuffles
// the class list deterministically. Within-task labels are remapped to
// 0..classes_per_task-1.
TaskStream split_by_classes(const IdxData& train, const IdxData& test, int classes_per_task,
                            std::uint64_t permutation_seed);

// Standardizes every split (in place) to zero mean / unit variance using the
// first task's train statistics only, frozen thereafter. Zero-variance
// features keep their centered values unscaled.
void standardize_stream(TaskStream& stream);

}  // namespace cgp

#endif
