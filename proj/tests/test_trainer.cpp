#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "cgp/error.hpp"
#include "cgp/rng.hpp"
#include "cgp/svd.hpp"
#include "cgp/trainer.hpp"

using namespace cgp;

namespace {

Matrix random_matrix(int rows, int cols, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(rows, cols);
    for (double& v : m.data) v = rng.normal();
    return m;
}

SyntheticSpec overlap_spec(std::uint64_t seed, double rho) {
    SyntheticSpec spec;
    spec.num_tasks = 2;
    spec.classes_per_task = 2;
    spec.input_dim = 12;
    spec.subspace_dim = 2;
    spec.train_per_class = 24;
    spec.test_per_class = 12;
    spec.noise = 0.3;
    spec.rho = rho;
    spec.seed = seed;
    return spec;
}

NetworkConfig net_for(const TaskStream& stream, std::vector<int> hidden, std::uint64_t seed) {
    NetworkConfig cfg;
    cfg.layer_sizes.push_back(stream.input_dim);
    for (int h : hidden) cfg.layer_sizes.push_back(h);
    cfg.num_tasks = stream.num_tasks();
    cfg.classes_per_task = stream.classes_per_task;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_SUITE_BEGIN("trainer");

TEST_CASE("augment with zero magnitudes copies the batch") {
    const Matrix batch = random_matrix(5, 7, 1);
    const AugmentedBatch aug = augment(batch, 0.0, 0.0, 99);
    REQUIRE(aug.data.rows == 10);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 7; ++j) {
            CHECK(aug.data.at(i, j) == batch.at(i, j));
            CHECK(aug.data.at(5 + i, j) == batch.at(i, j));
        }
}

TEST_CASE("augment pairing is a fixed-point-free involution") {
    const Matrix batch = random_matrix(4, 3, 2);
    const AugmentedBatch aug = augment(batch, 0.1, 0.1, 7);
    for (int i = 0; i < 8; ++i) {
        const int j = aug.pairing[static_cast<std::size_t>(i)];
        CHECK(j != i);
        CHECK(aug.pairing[static_cast<std::size_t>(j)] == i);
    }
}

TEST_CASE("augment is deterministic under its seed") {
    const Matrix batch = random_matrix(6, 5, 3);
    const AugmentedBatch a = augment(batch, 0.05, 0.1, 1234);
    const AugmentedBatch b = augment(batch, 0.05, 0.1, 1234);
    CHECK(a.data == b.data);
    const AugmentedBatch c = augment(batch, 0.05, 0.1, 1235);
    CHECK_FALSE(a.data == c.data);
}

TEST_CASE("project_gradients removes the protected component") {
    NetworkConfig cfg;
    cfg.layer_sizes = {6, 4};
    cfg.num_tasks = 1;
    cfg.classes_per_task = 2;
    BasisMemory mem = BasisMemory::for_network(cfg);

    Gradients grads;
    grads.task = 0;
    grads.weight_grads.push_back(random_matrix(4, 7, 4));
    const Matrix original = grads.weight_grads[0];

    SUBCASE("empty memory leaves gradients untouched") {
        const Gradients out = project_gradients(grads, mem);
        CHECK(out.weight_grads[0] == original);
    }

    SUBCASE("gradients inside the span vanish") {
        Matrix s(7, 2);
        s.at(0, 0) = 1.0;
        s.at(3, 1) = 1.0;
        mem.layers[0].basis = s;
        mem.layers[0].provenance.resize(2);
        Matrix inside(4, 7);
        for (int i = 0; i < 4; ++i) {
            inside.at(i, 0) = 1.0 + i;
            inside.at(i, 3) = 2.0 - i;
        }
        Gradients g;
        g.task = 0;
        g.weight_grads.push_back(inside);
        const Gradients out = project_gradients(g, mem);
        CHECK(max_abs(out.weight_grads[0]) <= 1e-12);
    }

    SUBCASE("projection annihilates alignment and is idempotent") {
        const SvdResult sv = svd(random_matrix(7, 3, 5));
        Matrix s(7, 3);
        for (int i = 0; i < 7; ++i)
            for (int j = 0; j < 3; ++j) s.at(i, j) = sv.u.at(i, j);
        mem.layers[0].basis = s;
        mem.layers[0].provenance.resize(3);

        const Gradients once = project_gradients(grads, mem);
        CHECK(max_abs(matmul(once.weight_grads[0], s)) <= 1e-10);
        const Gradients twice = project_gradients(once, mem);
        CHECK(max_abs(add_scaled(twice.weight_grads[0], once.weight_grads[0], -1.0)) <= 1e-12);
    }

    SUBCASE("a full basis zeroes the gradient exactly") {
        mem.layers[0].basis = Matrix::identity(7);
        mem.layers[0].provenance.resize(7);
        const Gradients out = project_gradients(grads, mem);
        CHECK(max_abs(out.weight_grads[0]) == 0.0);
    }
}

TEST_CASE("zero epochs leave the network bitwise unchanged") {
    const TaskStream stream = generate_synthetic(overlap_spec(21, 0.0));
    NetworkConfig nc = net_for(stream, {8, 4}, 77);
    Network net = make_network(nc);
    const Network before = net;
    BasisMemory mem = BasisMemory::for_network(nc);
    TrainConfig tc;
    tc.epochs = 0;
    const TaskResult result = train_task(net, stream.tasks[0], mem, tc);
    CHECK(result.epoch_losses.empty());
    for (std::size_t l = 0; l < net.weights.size(); ++l)
        CHECK(net.weights[l] == before.weights[l]);
    CHECK(net.heads[0] == before.heads[0]);
}

TEST_CASE("saturated memory freezes shared weights while the head still learns") {
    const TaskStream stream = generate_synthetic(overlap_spec(22, 0.5));
    NetworkConfig nc = net_for(stream, {8, 4}, 78);
    Network net = make_network(nc);
    BasisMemory mem = BasisMemory::for_network(nc);
    for (BasisLayer& layer : mem.layers) {
        layer.basis = Matrix::identity(layer.dim);
        layer.provenance.resize(static_cast<std::size_t>(layer.dim));
    }
    const Network before = net;
    TrainConfig tc;
    tc.epochs = 4;
    tc.lambda = 0.0;
    const TaskResult result = train_task(net, stream.tasks[0], mem, tc);
    for (std::size_t l = 0; l < net.weights.size(); ++l)
        CHECK(net.weights[l] == before.weights[l]);  // bitwise
    CHECK_FALSE(net.heads[0] == before.heads[0]);
    REQUIRE(result.epoch_losses.size() == 4);
    CHECK(result.epoch_losses.back() < result.epoch_losses.front());
}

TEST_CASE("protected subspaces keep old-task logits fixed at eps=1") {
    // quick variant of the stability oracle: 2 orthogonal tasks, eps = 1
    const TaskStream stream = generate_synthetic(overlap_spec(23, 0.0));
    NetworkConfig nc = net_for(stream, {10, 6}, 79);
    Network net = make_network(nc);
    BasisMemory mem = BasisMemory::for_network(nc);
    PrototypeMemory protos;
    TrainConfig tc;
    tc.epochs = 3;
    tc.lambda = 0.0;
    tc.eps = 1.0;
    tc.n_r = 24;  // every sample of the class
    tc.mode = RepresentationMode::br_std;

    train_task(net, stream.tasks[0], mem, tc);
    consolidate_task(net, stream.tasks[0], mem, protos, tc, true);
    net.freeze_head(0);

    const Matrix before = forward(net, stream.tasks[0].test_x, 0).logits;
    train_task(net, stream.tasks[1], mem, tc);
    const Matrix after = forward(net, stream.tasks[0].test_x, 0).logits;
    CHECK(max_abs(add_scaled(after, before, -1.0)) <= 1e-6);
}

TEST_CASE("consolidation branch tracing") {
    SUBCASE("one-class task with empty memory goes fresh") {
        SyntheticSpec spec = overlap_spec(24, 0.0);
        spec.classes_per_task = 1;
        spec.input_dim = 8;
        const TaskStream stream = generate_synthetic(spec);
        NetworkConfig nc = net_for(stream, {6, 4}, 80);
        Network net = make_network(nc);
        BasisMemory mem = BasisMemory::for_network(nc);
        PrototypeMemory protos;
        TrainConfig tc;
        const ConsolidationReport report =
            consolidate_task(net, stream.tasks[0], mem, protos, tc, true);
        REQUIRE(report.classes.size() == 1);
        CHECK(report.classes[0].branch == MergeBranch::fresh);
        CHECK(mem.total_columns() > 0);
    }

    SUBCASE("two same-distribution classes merge at eta=0.7") {
        // same cluster for both classes: identical distribution
        SyntheticSpec spec = overlap_spec(25, 1.0);
        spec.classes_per_task = 2;
        spec.subspace_dim = 2;
        SyntheticSpec one_dir = spec;
        TaskStream stream = generate_synthetic(one_dir);
        // force the two classes onto the same cluster by copying class 0 rows
        TaskData& task = stream.tasks[0];
        for (int i = 0; i < task.train_x.rows; ++i) {
            if (task.train_y[static_cast<std::size_t>(i)] == 1) {
                const int src = i % (task.train_x.rows / 2);
                for (int j = 0; j < task.train_x.cols; ++j)
                    task.train_x.at(i, j) = task.train_x.at(src, j) * 1.01;
            }
        }
        NetworkConfig nc = net_for(stream, {8, 4}, 81);
        Network net = make_network(nc);
        BasisMemory mem = BasisMemory::for_network(nc);
        PrototypeMemory protos;
        TrainConfig tc;
        tc.eta = 0.7;
        tc.mode = RepresentationMode::br_std;
        const ConsolidationReport report =
            consolidate_task(net, stream.tasks[0], mem, protos, tc, true);
        REQUIRE(report.classes.size() == 2);
        CHECK(report.classes[0].branch == MergeBranch::fresh);
        CHECK(report.classes[1].branch == MergeBranch::merged_concat);
        CHECK(report.classes[1].max_similarity > 0.7);
        CHECK(report.ortho_defect <= 1e-6);
    }

    SUBCASE("eta=1.0 never merges") {
        const TaskStream stream = generate_synthetic(overlap_spec(26, 1.0));
        NetworkConfig nc = net_for(stream, {8, 4}, 82);
        Network net = make_network(nc);
        BasisMemory mem = BasisMemory::for_network(nc);
        PrototypeMemory protos;
        TrainConfig tc;
        tc.eta = 1.0;
        for (const TaskData& task : stream.tasks) {
            const ConsolidationReport report =
                consolidate_task(net, task, mem, protos, tc, task.task_id == 0);
            for (const ClassConsolidation& c : report.classes)
                CHECK(c.branch == MergeBranch::fresh);
        }
    }
}

TEST_CASE("task_level baseline builds one representation per task") {
    const TaskStream stream = generate_synthetic(overlap_spec(27, 0.5));
    NetworkConfig nc = net_for(stream, {8, 4}, 83);
    Network net = make_network(nc);
    BasisMemory mem = BasisMemory::for_network(nc);
    PrototypeMemory protos;
    TrainConfig tc;
    tc.baseline = Baseline::task_level;
    const ConsolidationReport report =
        consolidate_task(net, stream.tasks[0], mem, protos, tc, true);
    CHECK(report.classes.size() == 1);
    CHECK(mem.total_columns() > 0);
    CHECK(protos.items.empty());  // no gating for the task-level baseline
    for (const BasisLayer& layer : mem.layers)
        CHECK(orthonormality_defect(layer.basis) <= 1e-6);
}

TEST_CASE("run_sequence is deterministic") {
    const SyntheticSpec spec = overlap_spec(28, 0.5);
    const TaskStream stream = generate_synthetic(spec);
    NetworkConfig nc = net_for(stream, {8, 4}, 84);
    TrainConfig tc;
    tc.epochs = 2;
    tc.seed = 42;
    const RunResult a = run_sequence(nc, tc, stream);
    const RunResult b = run_sequence(nc, tc, stream);
    for (int t = 0; t < a.accuracy.num_tasks; ++t)
        for (int i = 0; i <= t; ++i) {
            CHECK(a.accuracy.cell(t, i).correct == b.accuracy.cell(t, i).correct);
            CHECK(a.accuracy.cell(t, i).total == b.accuracy.cell(t, i).total);
        }
    for (std::size_t t = 0; t < a.tasks.size(); ++t)
        CHECK(a.tasks[t].epoch_losses == b.tasks[t].epoch_losses);
    for (std::size_t l = 0; l < a.net.weights.size(); ++l)
        CHECK(a.net.weights[l] == b.net.weights[l]);
}

TEST_CASE("finetune skips projection and consolidation") {
    const TaskStream stream = generate_synthetic(overlap_spec(29, 0.5));
    NetworkConfig nc = net_for(stream, {8, 4}, 85);
    TrainConfig tc;
    tc.epochs = 2;
    tc.baseline = Baseline::finetune;
    const RunResult run = run_sequence(nc, tc, stream);
    CHECK(run.memory.total_columns() == 0);
    CHECK(run.accuracy.complete());
}

TEST_CASE("multitask fills every row with its final accuracies") {
    const TaskStream stream = generate_synthetic(overlap_spec(30, 0.5));
    NetworkConfig nc = net_for(stream, {8, 4}, 86);
    TrainConfig tc;
    tc.epochs = 2;
    tc.baseline = Baseline::multitask;
    const RunResult run = run_sequence(nc, tc, stream);
    REQUIRE(run.accuracy.complete());
    const AccBwt m = acc_bwt(run.accuracy);
    CHECK(m.bwt == 0.0);  // constant columns
    for (int i = 0; i < run.accuracy.num_tasks - 1; ++i)
        CHECK(run.accuracy.cell(run.accuracy.num_tasks - 1, i).correct ==
              run.accuracy.cell(i, i).correct);
}

TEST_CASE("frozen earlier heads never change during later training") {
    const TaskStream stream = generate_synthetic(overlap_spec(31, 0.5));
    NetworkConfig nc = net_for(stream, {8, 4}, 87);
    TrainConfig tc;
    tc.epochs = 2;
    const RunResult run = run_sequence(nc, tc, stream);
    // replay task 0's training only and compare its head afterwards
    Network net = make_network(nc);
    BasisMemory mem = BasisMemory::for_network(nc);
    train_task(net, stream.tasks[0], mem, tc);
    CHECK(run.net.heads[0] == net.heads[0]);
}

TEST_CASE("a non-finite loss aborts with a diagnostic") {
    TaskStream stream = generate_synthetic(overlap_spec(32, 0.5));
    stream.tasks[0].train_x.at(3, 1) = std::numeric_limits<double>::infinity();
    NetworkConfig nc = net_for(stream, {8, 4}, 88);
    Network net = make_network(nc);
    BasisMemory mem = BasisMemory::for_network(nc);
    TrainConfig tc;
    tc.epochs = 2;
    tc.lambda = 0.0;
    tc.batch_size = stream.tasks[0].train_x.rows;  // the bad row is in every batch
    CHECK_THROWS_AS(train_task(net, stream.tasks[0], mem, tc), numeric_error);
}

TEST_CASE("train config validation") {
    TrainConfig tc;
    tc.eta = 1.5;
    CHECK_THROWS_AS(tc.validate(), config_error);
    tc = TrainConfig{};
    tc.eps = 0.0;
    CHECK_THROWS_AS(tc.validate(), config_error);
    tc = TrainConfig{};
    tc.mu = 0.0;
    CHECK_THROWS_AS(tc.validate(), config_error);
    tc = TrainConfig{};
    tc.lambda = -0.1;
    CHECK_THROWS_AS(tc.validate(), config_error);
}

TEST_SUITE_END();
