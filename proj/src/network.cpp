#include "cgp/network.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "cgp/error.hpp"
#include "cgp/rng.hpp"

namespace cgp {

namespace {

constexpr double kZeroRowNorm = 1e-12;

Matrix append_bias_column(const Matrix& x) {
    Matrix out(x.rows, x.cols + 1);
    for (int i = 0; i < x.rows; ++i) {
        const double* src = x.row_ptr(i);
        double* dst = out.row_ptr(i);
        for (int j = 0; j < x.cols; ++j) dst[j] = src[j];
        dst[x.cols] = 1.0;
    }
    return out;
}

Matrix strip_bias_column(const Matrix& x) {
    Matrix out(x.rows, x.cols - 1);
    for (int i = 0; i < x.rows; ++i) {
        const double* src = x.row_ptr(i);
        double* dst = out.row_ptr(i);
        for (int j = 0; j < out.cols; ++j) dst[j] = src[j];
    }
    return out;
}

void relu_inplace(Matrix& x) {
    for (double& v : x.data)
        if (v < 0.0) v = 0.0;
}

}  // namespace

void NetworkConfig::validate() const {
    if (layer_sizes.size() < 2)
        throw config_error("network needs at least an input and an embedding dimension");
    for (int d : layer_sizes)
        if (d <= 0) throw config_error("layer sizes must be positive");
    if (num_tasks <= 0 || classes_per_task <= 0)
        throw config_error("num_tasks and classes_per_task must be positive");
}

Network make_network(const NetworkConfig& config) {
    config.validate();
    Network net;
    net.config = config;
    Rng rng(config.seed);
    for (int l = 0; l < config.num_layers(); ++l) {
        const int fan_in = config.layer_sizes[static_cast<std::size_t>(l)];
        const int fan_out = config.layer_sizes[static_cast<std::size_t>(l) + 1];
        Matrix w(fan_out, fan_in + 1);
        const double sd = std::sqrt(2.0 / fan_in);
        for (int i = 0; i < fan_out; ++i) {
            for (int j = 0; j < fan_in; ++j) w.at(i, j) = sd * rng.normal();
            w.at(i, fan_in) = 0.0;  // bias starts at zero
        }
        net.weights.push_back(std::move(w));
    }
    const int emb = config.embedding_dim();
    const double head_sd = std::sqrt(1.0 / emb);
    for (int t = 0; t < config.num_tasks; ++t) {
        Matrix h(config.classes_per_task, emb);
        for (double& v : h.data) v = head_sd * rng.normal();
        net.heads.push_back(std::move(h));
    }
    net.frozen_heads.assign(static_cast<std::size_t>(config.num_tasks), false);
    return net;
}

ForwardTrace forward(const Network& net, const Matrix& batch, int task) {
    if (task < 0 || task >= net.config.num_tasks)
        throw contract_error("forward: unknown task id " + std::to_string(task));
    if (batch.cols != net.config.input_dim())
        throw contract_error("forward: batch has " + std::to_string(batch.cols) +
                             " columns, network expects " + std::to_string(net.config.input_dim()));

    ForwardTrace trace;
    trace.task = task;
    Matrix x = batch;
    for (const Matrix& w : net.weights) {
        Matrix xb = append_bias_column(x);
        Matrix z = matmul_nt(xb, w);
        trace.layer_inputs.push_back(std::move(xb));
        relu_inplace(z);
        x = std::move(z);
    }
    trace.raw_embedding = x;
    trace.embedding = std::move(x);
    trace.embedding_norms.resize(static_cast<std::size_t>(trace.embedding.rows));
    for (int i = 0; i < trace.embedding.rows; ++i) {
        double* row = trace.embedding.row_ptr(i);
        double nrm2 = 0.0;
        for (int j = 0; j < trace.embedding.cols; ++j) nrm2 += row[j] * row[j];
        const double nrm = std::sqrt(nrm2);
        trace.embedding_norms[static_cast<std::size_t>(i)] = nrm;
        if (nrm > kZeroRowNorm) {
            const double inv = 1.0 / nrm;
            for (int j = 0; j < trace.embedding.cols; ++j) row[j] *= inv;
        }
    }
    trace.logits = matmul_nt(trace.embedding, net.heads[static_cast<std::size_t>(task)]);
    return trace;
}

LossValue cross_entropy(const Matrix& logits, const std::vector<int>& labels) {
    if (static_cast<int>(labels.size()) != logits.rows)
        throw contract_error("cross_entropy: label count does not match batch");
    const int batch = logits.rows;
    const int classes = logits.cols;

    LossValue out;
    out.grad = Matrix(batch, classes);
    double total = 0.0;
    for (int i = 0; i < batch; ++i) {
        const int y = labels[static_cast<std::size_t>(i)];
        if (y < 0 || y >= classes)
            throw contract_error("cross_entropy: label " + std::to_string(y) + " out of range");
        const double* row = logits.row_ptr(i);
        double m = row[0];
        for (int c = 1; c < classes; ++c)
            if (row[c] > m) m = row[c];
        double z = 0.0;
        for (int c = 0; c < classes; ++c) z += std::exp(row[c] - m);
        total += -(row[y] - m) + std::log(z);
        double* grow = out.grad.row_ptr(i);
        const double inv_batch = 1.0 / batch;
        for (int c = 0; c < classes; ++c) grow[c] = std::exp(row[c] - m) / z * inv_batch;
        grow[y] -= inv_batch;
    }
    out.value = total / batch;
    return out;
}

LossValue contrastive_loss(const Matrix& embeddings, const std::vector<int>& pairing,
                           double temperature) {
    const int n2 = embeddings.rows;
    if (n2 < 2 || n2 % 2 != 0)
        throw contract_error("contrastive_loss: need an even number of embeddings");
    if (static_cast<int>(pairing.size()) != n2)
        throw contract_error("contrastive_loss: pairing size mismatch");
    if (temperature <= 0.0) throw contract_error("contrastive_loss: temperature must be positive");
    for (int i = 0; i < n2; ++i) {
        const int j = pairing[static_cast<std::size_t>(i)];
        if (j < 0 || j >= n2 || j == i || pairing[static_cast<std::size_t>(j)] != i)
            throw contract_error("contrastive_loss: pairing is not a fixed-point-free involution");
    }
    for (int i = 0; i < n2; ++i) {
        const double* row = embeddings.row_ptr(i);
        double nrm2 = 0.0;
        for (int j = 0; j < embeddings.cols; ++j) nrm2 += row[j] * row[j];
        if (std::fabs(nrm2 - 1.0) > 2e-6)
            throw contract_error("contrastive_loss: row " + std::to_string(i) +
                                 " is not unit-normalized");
    }

    Matrix sim = matmul_nt(embeddings, embeddings);
    const double inv_mu = 1.0 / temperature;

    // coeff[i][k] = p_ik - 1[k = pairing[i]] for the summed-over rows i;
    // the gradient is then (coeff + coeff^T) * embeddings / mu.
    Matrix coeff(n2, n2);
    double total = 0.0;
    for (int i = 0; i < n2; ++i) {
        if (pairing[static_cast<std::size_t>(i)] < i) continue;  // one term per pair
        double m = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < n2; ++k) {
            if (k == i) continue;
            const double s = sim.at(i, k) * inv_mu;
            if (s > m) m = s;
        }
        double z = 0.0;
        for (int k = 0; k < n2; ++k) {
            if (k == i) continue;
            z += std::exp(sim.at(i, k) * inv_mu - m);
        }
        const int j = pairing[static_cast<std::size_t>(i)];
        total += -(sim.at(i, j) * inv_mu - m) + std::log(z);
        double* crow = coeff.row_ptr(i);
        for (int k = 0; k < n2; ++k) {
            if (k == i) continue;
            crow[k] = std::exp(sim.at(i, k) * inv_mu - m) / z;
        }
        crow[j] -= 1.0;
    }

    LossValue out;
    out.value = total;
    Matrix g = matmul(coeff, embeddings);
    Matrix gt = matmul_tn(coeff, embeddings);
    axpy(g, gt, 1.0);
    scale(g, inv_mu);
    out.grad = std::move(g);
    return out;
}

Gradients backward(const Network& net, const ForwardTrace& trace, const Matrix& dlogits,
                   const Matrix& dembedding_con, double lambda) {
    const int task = trace.task;
    const Matrix& head = net.heads[static_cast<std::size_t>(task)];
    const int batch = trace.embedding.rows;
    const int emb = trace.embedding.cols;

    Gradients grads;
    grads.task = task;

    // embedding-space gradient: chain the head, then add the contrastive term
    Matrix dy(batch, emb);
    if (!dlogits.empty()) {
        grads.head_grad = matmul_tn(dlogits, trace.embedding);
        dy = matmul(dlogits, head);
    } else {
        grads.head_grad = Matrix(head.rows, head.cols);
    }
    if (lambda != 0.0 && !dembedding_con.empty()) axpy(dy, dembedding_con, lambda);

    // through the row normalization y = e / |e|
    Matrix de(batch, emb);
    for (int i = 0; i < batch; ++i) {
        const double nrm = trace.embedding_norms[static_cast<std::size_t>(i)];
        if (nrm <= kZeroRowNorm) continue;  // flat spot, gradient stays zero
        const double* yrow = trace.embedding.row_ptr(i);
        const double* dyrow = dy.row_ptr(i);
        double ydy = 0.0;
        for (int j = 0; j < emb; ++j) ydy += yrow[j] * dyrow[j];
        double* drow = de.row_ptr(i);
        const double inv = 1.0 / nrm;
        for (int j = 0; j < emb; ++j) drow[j] = (dyrow[j] - ydy * yrow[j]) * inv;
    }

    // through the ReLU stack; the mask comes from the captured activations
    const int layers = static_cast<int>(net.weights.size());
    grads.weight_grads.resize(static_cast<std::size_t>(layers));
    Matrix dx = std::move(de);
    for (int l = layers - 1; l >= 0; --l) {
        const Matrix& act = (l == layers - 1)
                                ? trace.raw_embedding
                                : strip_bias_column(trace.layer_inputs[static_cast<std::size_t>(l) + 1]);
        Matrix dz = std::move(dx);
        for (std::size_t i = 0; i < dz.data.size(); ++i)
            if (act.data[i] <= 0.0) dz.data[i] = 0.0;
        grads.weight_grads[static_cast<std::size_t>(l)] =
            matmul_tn(dz, trace.layer_inputs[static_cast<std::size_t>(l)]);
        if (l > 0) dx = strip_bias_column(matmul(dz, net.weights[static_cast<std::size_t>(l)]));
    }
    return grads;
}

void apply_update(Network& net, const Gradients& grads, double alpha) {
    if (grads.weight_grads.size() != net.weights.size())
        throw contract_error("apply_update: gradient shape mismatch");
    for (std::size_t l = 0; l < net.weights.size(); ++l)
        axpy(net.weights[l], grads.weight_grads[l], -alpha);
    if (!net.head_frozen(grads.task) && !grads.head_grad.empty())
        axpy(net.heads[static_cast<std::size_t>(grads.task)], grads.head_grad, -alpha);
}

}  // namespace cgp
