#ifndef CGP_SUBSPACE_HPP
#define CGP_SUBSPACE_HPP

#include <vector>

#include "cgp/matrix.hpp"
#include "cgp/network.hpp"

namespace cgp {

// Which task/classes a stored basis column protects. The class set grows
// when a column is selected as a shared base for a later, similar class.
struct BasisProvenance {
    int task = 0;
    std::vector<int> classes;  // global class ids, ascending
};

struct BasisLayer {
    int dim = 0;     // layer input dimension including the bias coordinate
    Matrix basis;    // dim x count, orthonormal columns
    std::vector<BasisProvenance> provenance;  // one entry per column

    int count() const { return basis.cols; }
    bool full() const { return count() >= dim; }
};

// Per-layer orthonormal bases accumulated across classes and tasks.
struct BasisMemory {
    std::vector<BasisLayer> layers;

    static BasisMemory for_network(const NetworkConfig& config);
    int total_columns() const;
};

struct Prototype {
    int class_id = 0;  // global id
    int task = 0;
    std::vector<double> values;  // unit norm
};

struct PrototypeMemory {
    std::vector<Prototype> items;
};

// Captured layer inputs (columns) plus the prototype for one finished class.
struct ClassRepresentation {
    int class_id = 0;  // global id
    int task = 0;
    std::vector<Matrix> layer_reps;  // per layer: (dim_l + 1) x n_selected
    std::vector<double> prototype;
};

enum class RepresentationMode { br_std, br_gtl };

// ---- primitive operations ---------------------------------------------------

// Normalized mean of the given embedding rows. Throws numeric_error when the
// mean is (numerically) the zero vector.
std::vector<double> compute_prototype(const Matrix& embeddings);

// Cosine similarity of two unit vectors.
double similarity(const std::vector<double>& p, const std::vector<double>& q);

// Smallest k with sum_{i<=k} sigma_i^2 >= eps * sum_i sigma_i^2.
int k_rank_first(const std::vector<double>& sigma, double eps);

// Smallest k >= 0 with proj_energy + sum_{i<=k} sigma_i^2 >= eps * total_energy.
// Requires proj_energy + sum sigma^2 == total_energy within 1e-6 relative.
int k_rank_residual(const std::vector<double>& sigma_residual, double proj_energy,
                    double total_energy, double eps);

// c_hat = c - S S^T c and the projected energy |S S^T c|_F^2.
struct Residual {
    Matrix c_hat;
    double proj_energy = 0.0;
};
Residual residualize(const Matrix& c, const Matrix& s);

// diag(S^T C C^T S): squared projection energy of C onto each stored base.
std::vector<double> common_base_energies(const Matrix& c, const Matrix& s);

// ---- class consolidation ----------------------------------------------------

// Selects this class's representation samples from the finished task's data.
// BR-GTL keeps only correctly predicted samples (falling back to BR-STD with a
// warning when none qualify); BR-STD keeps the first n_r regardless.
ClassRepresentation extract_class_representation(const Network& net, const Matrix& samples,
                                                 const std::vector<int>& labels, int task,
                                                 int label, int global_class_id,
                                                 RepresentationMode mode, int n_r);

enum class MergeBranch { fresh, merged_concat, merged_shared };

struct ConstructResult {
    MergeBranch branch = MergeBranch::fresh;
    int matched_class = -1;    // global id of the most similar stored class
    double max_similarity = -2.0;
    int new_columns = 0;       // appended across all layers
    int shared_columns = 0;    // existing columns re-tagged for this class
    bool saturated = false;    // some layer hit its dimension cap
};

// Similarity-gated basis construction for one class (the Base Refining step).
// When the best stored prototype exceeds eta and belongs to the current first
// task, the matched class's columns are rebuilt from the concatenated
// representations; otherwise shared existing bases and novel residual
// directions are selected by energy. first_task_reps may be null.
ConstructResult construct_class_bases(const ClassRepresentation& rep, BasisMemory& mem,
                                      PrototypeMemory& protos, double eps, double eta,
                                      const std::vector<ClassRepresentation>* first_task_reps);

// First-task pair merge in isolation: SVD of the column-concatenation with the
// plain k-rank criterion, one basis set per layer.
std::vector<Matrix> merge_first_task_pair(const ClassRepresentation& a,
                                          const ClassRepresentation& b, double eps);

// Ungated construction from one representation (the task-level baseline):
// residualize against the stored bases, SVD, keep the residual k-rank leaders.
ConstructResult construct_task_bases(const std::vector<Matrix>& layer_reps, BasisMemory& mem,
                                     const BasisProvenance& prov, double eps);

}  // namespace cgp

#endif
