#include <doctest.h>

#include <cmath>
#include <vector>

#include "cgp/error.hpp"
#include "cgp/network.hpp"
#include "cgp/rng.hpp"

using namespace cgp;

namespace {

Matrix random_batch(int rows, int cols, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(rows, cols);
    for (double& v : m.data) v = rng.normal();
    return m;
}

NetworkConfig small_config(std::uint64_t seed) {
    NetworkConfig cfg;
    cfg.layer_sizes = {6, 8, 5};
    cfg.num_tasks = 2;
    cfg.classes_per_task = 3;
    cfg.seed = seed;
    return cfg;
}

// test-local straight-line forward, no shared code with the implementation
std::vector<double> naive_logits(const Network& net, const std::vector<double>& input, int task) {
    std::vector<double> x = input;
    for (const Matrix& w : net.weights) {
        std::vector<double> next(static_cast<std::size_t>(w.rows), 0.0);
        for (int i = 0; i < w.rows; ++i) {
            double acc = 0.0;
            for (int j = 0; j < w.cols - 1; ++j) acc += w.at(i, j) * x[static_cast<std::size_t>(j)];
            acc += w.at(i, w.cols - 1);  // bias input of one
            next[static_cast<std::size_t>(i)] = acc > 0.0 ? acc : 0.0;
        }
        x = std::move(next);
    }
    double nrm = 0.0;
    for (double v : x) nrm += v * v;
    nrm = std::sqrt(nrm);
    if (nrm > 1e-12)
        for (double& v : x) v /= nrm;
    const Matrix& head = net.heads[static_cast<std::size_t>(task)];
    std::vector<double> logits(static_cast<std::size_t>(head.rows), 0.0);
    for (int c = 0; c < head.rows; ++c) {
        double acc = 0.0;
        for (int e = 0; e < head.cols; ++e) acc += head.at(c, e) * x[static_cast<std::size_t>(e)];
        logits[static_cast<std::size_t>(c)] = acc;
    }
    return logits;
}

// compound loss evaluated from scratch for finite differencing
double compound_loss(const Network& net, const Matrix& batch, const std::vector<int>& labels,
                     const std::vector<int>& pairing, double lambda, double mu, int task) {
    ForwardTrace trace = forward(net, batch, task);
    const LossValue ce = cross_entropy(trace.logits, labels);
    double value = ce.value;
    if (lambda != 0.0) value += lambda * contrastive_loss(trace.embedding, pairing, mu).value;
    return value;
}

}  // namespace

TEST_SUITE_BEGIN("network");

TEST_CASE("zero-weight network yields all-zero logits") {
    Network net = make_network(small_config(1));
    for (Matrix& w : net.weights) w = Matrix(w.rows, w.cols);
    for (Matrix& h : net.heads) h = Matrix(h.rows, h.cols);
    const ForwardTrace trace = forward(net, random_batch(4, 6, 2), 0);
    CHECK(max_abs(trace.logits) == 0.0);
}

TEST_CASE("one-layer network embeds the normalized ReLU response") {
    NetworkConfig cfg;
    cfg.layer_sizes = {3, 2};
    cfg.num_tasks = 1;
    cfg.classes_per_task = 2;
    Network net = make_network(cfg);
    net.weights[0] = Matrix(2, 4, {1.0, 0.0, 0.0, 0.0,
                                   0.0, -1.0, 0.0, 0.0});
    Matrix batch(1, 3, {0.6, 0.8, 0.0});
    const ForwardTrace trace = forward(net, batch, 0);
    // ReLU(Wx) = (0.6, 0), normalized (1, 0)
    CHECK(trace.embedding.at(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(trace.embedding.at(0, 1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(trace.layer_inputs[0].at(0, 3) == 1.0);  // appended bias column
    CHECK(trace.layer_inputs[0].at(0, 0) == 0.6);  // raw input preserved
}

TEST_CASE("forward matches an independent reimplementation") {
    Network net = make_network(small_config(3));
    const Matrix batch = random_batch(5, 6, 4);
    const ForwardTrace trace = forward(net, batch, 1);
    for (int r = 0; r < batch.rows; ++r) {
        std::vector<double> input(static_cast<std::size_t>(batch.cols));
        for (int j = 0; j < batch.cols; ++j) input[static_cast<std::size_t>(j)] = batch.at(r, j);
        const std::vector<double> expect = naive_logits(net, input, 1);
        for (int c = 0; c < trace.logits.cols; ++c)
            CHECK(trace.logits.at(r, c) ==
                  doctest::Approx(expect[static_cast<std::size_t>(c)]).epsilon(1e-12));
    }
}

TEST_CASE("forward validates the task id and batch width") {
    Network net = make_network(small_config(5));
    CHECK_THROWS_AS(forward(net, random_batch(2, 6, 6), 7), contract_error);
    CHECK_THROWS_AS(forward(net, random_batch(2, 5, 6), 0), contract_error);
}

TEST_CASE("embedding rows are unit norm") {
    Network net = make_network(small_config(8));
    const ForwardTrace trace = forward(net, random_batch(6, 6, 9), 0);
    for (int i = 0; i < trace.embedding.rows; ++i) {
        double nrm = 0.0;
        for (int j = 0; j < trace.embedding.cols; ++j)
            nrm += trace.embedding.at(i, j) * trace.embedding.at(i, j);
        nrm = std::sqrt(nrm);
        CHECK((std::fabs(nrm - 1.0) <= 1e-8 || nrm == 0.0));
    }
}

TEST_CASE("cross entropy of uniform logits is ln 2") {
    Matrix logits(3, 2);
    const LossValue loss = cross_entropy(logits, {0, 1, 0});
    CHECK(loss.value == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("cross entropy decreases as the true logit grows") {
    double prev = 1e300;
    for (double m : {0.0, 1.0, 4.0, 16.0, 64.0}) {
        Matrix logits(1, 3);
        logits.at(0, 1) = m;
        const LossValue loss = cross_entropy(logits, {1});
        CHECK(std::isfinite(loss.value));
        CHECK(loss.value < prev);
        prev = loss.value;
    }
}

TEST_CASE("cross entropy gradient matches finite differences") {
    Matrix logits = random_batch(4, 3, 10);
    const std::vector<int> labels{0, 2, 1, 0};
    const LossValue loss = cross_entropy(logits, labels);
    const double h = 1e-6;
    for (int i = 0; i < logits.rows; ++i)
        for (int c = 0; c < logits.cols; ++c) {
            Matrix lp = logits, lm = logits;
            lp.at(i, c) += h;
            lm.at(i, c) -= h;
            const double fd =
                (cross_entropy(lp, labels).value - cross_entropy(lm, labels).value) / (2 * h);
            CHECK(loss.grad.at(i, c) == doctest::Approx(fd).epsilon(1e-6));
        }
    CHECK_THROWS_AS(cross_entropy(logits, {0, 1, 3, 0}), contract_error);
}

TEST_CASE("contrastive loss of a single pair is zero") {
    Matrix emb(2, 3, {1.0, 0.0, 0.0,
                      0.0, 1.0, 0.0});
    const LossValue loss = contrastive_loss(emb, {1, 0}, 0.5);
    CHECK(loss.value == 0.0);
}

TEST_CASE("contrastive loss of two orthogonal pairs matches hand evaluation") {
    Matrix emb(4, 2, {1.0, 0.0,
                      0.0, 1.0,
                      1.0, 0.0,
                      0.0, 1.0});
    const LossValue loss = contrastive_loss(emb, {2, 3, 0, 1}, 1.0);
    // per source: inner products {1 (positive), 0, 0}
    const double expected = 2.0 * -std::log(std::exp(1.0) / (std::exp(1.0) + 2.0));
    CHECK(loss.value == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("contrastive loss validates its contract") {
    Matrix bad(2, 2, {2.0, 0.0, 0.0, 1.0});
    CHECK_THROWS_AS(contrastive_loss(bad, {1, 0}, 1.0), contract_error);
    Matrix ok(2, 2, {1.0, 0.0, 0.0, 1.0});
    CHECK_THROWS_AS(contrastive_loss(ok, {0, 1}, 1.0), contract_error);   // fixed points
    CHECK_THROWS_AS(contrastive_loss(ok, {1, 0}, 0.0), contract_error);   // temperature
    Matrix odd(3, 2, {1.0, 0.0, 0.0, 1.0, 1.0, 0.0});
    CHECK_THROWS_AS(contrastive_loss(odd, {1, 0, 2}, 1.0), contract_error);
}

TEST_CASE("contrastive gradient matches finite differences") {
    Rng rng(11);
    const int n2 = 8, dim = 4;
    Matrix emb(n2, dim);
    for (int i = 0; i < n2; ++i) {
        double nrm = 0.0;
        for (int j = 0; j < dim; ++j) {
            emb.at(i, j) = rng.normal();
            nrm += emb.at(i, j) * emb.at(i, j);
        }
        nrm = std::sqrt(nrm);
        for (int j = 0; j < dim; ++j) emb.at(i, j) /= nrm;
    }
    std::vector<int> pairing{4, 5, 6, 7, 0, 1, 2, 3};
    const LossValue loss = contrastive_loss(emb, pairing, 0.1);
    const double h = 1e-7;  // small enough to keep rows inside the norm contract
    for (int i = 0; i < n2; ++i)
        for (int j = 0; j < dim; ++j) {
            Matrix ep = emb, em = emb;
            ep.at(i, j) += h;
            em.at(i, j) -= h;
            const double fd = (contrastive_loss(ep, pairing, 0.1).value -
                               contrastive_loss(em, pairing, 0.1).value) /
                              (2 * h);
            CHECK(loss.grad.at(i, j) == doctest::Approx(fd).epsilon(1e-5));
        }
}

TEST_CASE("backward with lambda zero is the cross-entropy gradient") {
    Network net = make_network(small_config(12));
    const Matrix batch = random_batch(4, 6, 13);
    const ForwardTrace trace = forward(net, batch, 0);
    const LossValue ce = cross_entropy(trace.logits, {0, 1, 2, 0});
    Matrix zero_con(trace.embedding.rows, trace.embedding.cols);
    const Gradients a = backward(net, trace, ce.grad, Matrix(), 0.0);
    const Gradients b = backward(net, trace, ce.grad, zero_con, 0.0);
    for (std::size_t l = 0; l < a.weight_grads.size(); ++l)
        CHECK(a.weight_grads[l] == b.weight_grads[l]);
    CHECK(a.head_grad == b.head_grad);
}

TEST_CASE("backward is linear in the two loss terms") {
    Network net = make_network(small_config(14));
    const Matrix batch = random_batch(4, 6, 15);
    const ForwardTrace trace = forward(net, batch, 0);
    const LossValue con = contrastive_loss(trace.embedding, {2, 3, 0, 1}, 0.5);
    Matrix zero_logits(trace.logits.rows, trace.logits.cols);
    const Gradients only_con = backward(net, trace, zero_logits, con.grad, 1.0);
    const LossValue ce = cross_entropy(trace.logits, {0, 1, 2, 0});
    const Gradients both = backward(net, trace, ce.grad, con.grad, 1.0);
    const Gradients only_ce = backward(net, trace, ce.grad, Matrix(), 0.0);
    for (std::size_t l = 0; l < both.weight_grads.size(); ++l) {
        const Matrix sum = add_scaled(only_ce.weight_grads[l], only_con.weight_grads[l], 1.0);
        CHECK(max_abs(add_scaled(both.weight_grads[l], sum, -1.0)) <= 1e-12);
    }
}

TEST_CASE("compound gradient matches finite differences through the network") {
    // batch of 4 = 2 sources + 2 paired views
    Network net = make_network(small_config(16));
    const Matrix batch = random_batch(4, 6, 17);
    const std::vector<int> labels{0, 1, 0, 1};
    const std::vector<int> pairing{2, 3, 0, 1};
    const double mu = 0.5;
    const double h = 1e-5;

    for (double lambda : {0.0, 0.1, 1.0}) {
        ForwardTrace trace = forward(net, batch, 0);
        LossValue ce = cross_entropy(trace.logits, labels);
        LossValue con;
        if (lambda != 0.0) con = contrastive_loss(trace.embedding, pairing, mu);
        const Gradients grads = backward(net, trace, ce.grad, con.grad, lambda);

        for (std::size_t l = 0; l < net.weights.size(); ++l) {
            for (int i = 0; i < net.weights[l].rows; ++i)
                for (int j = 0; j < net.weights[l].cols; ++j) {
                    Network np = net, nm = net;
                    np.weights[l].at(i, j) += h;
                    nm.weights[l].at(i, j) -= h;
                    const double fd = (compound_loss(np, batch, labels, pairing, lambda, mu, 0) -
                                       compound_loss(nm, batch, labels, pairing, lambda, mu, 0)) /
                                      (2 * h);
                    const double an = grads.weight_grads[l].at(i, j);
                    CHECK(std::fabs(an - fd) <= 1e-5 * std::max(1.0, std::fabs(fd)));
                }
        }
        for (int i = 0; i < net.heads[0].rows; ++i)
            for (int j = 0; j < net.heads[0].cols; ++j) {
                Network np = net, nm = net;
                np.heads[0].at(i, j) += h;
                nm.heads[0].at(i, j) -= h;
                const double fd = (compound_loss(np, batch, labels, pairing, lambda, mu, 0) -
                                   compound_loss(nm, batch, labels, pairing, lambda, mu, 0)) /
                                  (2 * h);
                CHECK(std::fabs(grads.head_grad.at(i, j) - fd) <=
                      1e-5 * std::max(1.0, std::fabs(fd)));
            }
    }
}

TEST_CASE("apply_update basics") {
    Network net = make_network(small_config(18));
    const Network before = net;
    const Matrix batch = random_batch(4, 6, 19);
    ForwardTrace trace = forward(net, batch, 0);
    LossValue ce = cross_entropy(trace.logits, {0, 1, 2, 0});
    Gradients grads = backward(net, trace, ce.grad, Matrix(), 0.0);

    apply_update(net, grads, 0.0);
    for (std::size_t l = 0; l < net.weights.size(); ++l)
        CHECK(net.weights[l] == before.weights[l]);

    Gradients zero = grads;
    for (Matrix& g : zero.weight_grads) g = Matrix(g.rows, g.cols);
    zero.head_grad = Matrix(zero.head_grad.rows, zero.head_grad.cols);
    apply_update(net, zero, 0.7);
    for (std::size_t l = 0; l < net.weights.size(); ++l)
        CHECK(net.weights[l] == before.weights[l]);
    CHECK(net.heads[0] == before.heads[0]);
}

TEST_CASE("one SGD step descends on the loss") {
    Network net = make_network(small_config(20));
    const Matrix batch = random_batch(8, 6, 21);
    const std::vector<int> labels{0, 1, 2, 0, 1, 2, 0, 1};
    ForwardTrace trace = forward(net, batch, 0);
    const LossValue before = cross_entropy(trace.logits, labels);
    Gradients grads = backward(net, trace, before.grad, Matrix(), 0.0);
    apply_update(net, grads, 0.05);
    const LossValue after = cross_entropy(forward(net, batch, 0).logits, labels);
    CHECK(after.value < before.value);
}

TEST_CASE("frozen heads are not touched by updates") {
    Network net = make_network(small_config(22));
    net.freeze_head(0);
    const Matrix head_before = net.heads[0];
    const Matrix batch = random_batch(4, 6, 23);
    ForwardTrace trace = forward(net, batch, 0);
    LossValue ce = cross_entropy(trace.logits, {0, 1, 2, 0});
    Gradients grads = backward(net, trace, ce.grad, Matrix(), 0.0);
    apply_update(net, grads, 0.5);
    CHECK(net.heads[0] == head_before);  // bitwise
}

TEST_SUITE_END();
