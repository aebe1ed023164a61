#ifndef CGP_NETWORK_HPP
#define CGP_NETWORK_HPP

#include <cstdint>
#include <vector>

#include "cgp/matrix.hpp"

namespace cgp {

struct NetworkConfig {
    std::vector<int> layer_sizes;  // input dim, hidden dims..., embedding dim
    int num_tasks = 1;
    int classes_per_task = 2;
    std::uint64_t seed = 0;

    void validate() const;
    int input_dim() const { return layer_sizes.front(); }
    int embedding_dim() const { return layer_sizes.back(); }
    int num_layers() const { return static_cast<int>(layer_sizes.size()) - 1; }
};

// Fully-connected ReLU network with per-task classifier heads. The bias of
// every shared layer is folded in as an extra input column of constant one,
// so weight l is layer_sizes[l+1] x (layer_sizes[l] + 1). Heads are
// classes_per_task x embedding_dim and act on the row-normalized embedding.
struct Network {
    NetworkConfig config;
    std::vector<Matrix> weights;
    std::vector<Matrix> heads;
    std::vector<bool> frozen_heads;

    bool head_frozen(int task) const { return frozen_heads[static_cast<std::size_t>(task)]; }
    void freeze_head(int task) { frozen_heads[static_cast<std::size_t>(task)] = true; }
};

Network make_network(const NetworkConfig& config);

// Captured per-layer inputs from one forward pass; layer_inputs[l] is the
// batch of inputs to layer l with the bias column appended, layer_inputs[0]
// being the raw input batch.
struct ForwardTrace {
    int task = 0;
    std::vector<Matrix> layer_inputs;
    Matrix raw_embedding;            // post-ReLU output of the last layer
    std::vector<double> embedding_norms;
    Matrix embedding;                // row-normalized (zero rows stay zero)
    Matrix logits;
};

ForwardTrace forward(const Network& net, const Matrix& batch, int task);

struct Gradients {
    int task = 0;
    std::vector<Matrix> weight_grads;
    Matrix head_grad;
};

struct LossValue {
    double value = 0.0;
    Matrix grad;  // w.r.t. logits (cross entropy) or embeddings (contrastive)
};

// Mean negative log-softmax of the true class plus its analytic gradient.
LossValue cross_entropy(const Matrix& logits, const std::vector<int>& labels);

// Eq.-style pairwise contrastive loss over 2N unit-normalized embeddings.
// `pairing` maps each row to its positive partner and must be a fixed-point
// free involution; the loss sums over the lower index of each pair.
LossValue contrastive_loss(const Matrix& embeddings, const std::vector<int>& pairing,
                           double temperature);

// Gradients of L = L_ce + lambda * L_con for the shared weights and the
// active head. dlogits comes from cross_entropy, dembedding_con from
// contrastive_loss (may be empty when lambda == 0).
Gradients backward(const Network& net, const ForwardTrace& trace, const Matrix& dlogits,
                   const Matrix& dembedding_con, double lambda);

// W <- W - alpha * grad for every unfrozen parameter.
void apply_update(Network& net, const Gradients& grads, double alpha);

}  // namespace cgp

#endif
