#include "cgp/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "cgp/error.hpp"
#include "cgp/rng.hpp"

namespace cgp {

void TrainConfig::validate() const {
    if (alpha <= 0.0) throw config_error("alpha must be positive");
    if (epochs < 0) throw config_error("epochs must be non-negative");
    if (batch_size < 1) throw config_error("batch_size must be at least 1");
    if (lambda < 0.0) throw config_error("lambda must be non-negative");
    if (mu <= 0.0) throw config_error("mu must be positive");
    if (eta < 0.0 || eta > 1.0) throw config_error("eta must be in [0, 1]");
    if (eps <= 0.0 || eps > 1.0) throw config_error("eps must be in (0, 1]");
    if (n_r < 1) throw config_error("n_r must be at least 1");
    if (aug_noise < 0.0 || aug_scale_jitter < 0.0)
        throw config_error("augmentation magnitudes must be non-negative");
}

AugmentedBatch augment(const Matrix& batch, double noise, double scale_jitter,
                       std::uint64_t seed) {
    if (batch.rows == 0) throw contract_error("augment: empty batch");
    Rng rng(seed);
    const int n = batch.rows;
    AugmentedBatch out;
    out.data = Matrix(2 * n, batch.cols);
    for (int i = 0; i < n; ++i) {
        const double* src = batch.row_ptr(i);
        double* same = out.data.row_ptr(i);
        double* view = out.data.row_ptr(n + i);
        for (int j = 0; j < batch.cols; ++j) {
            same[j] = src[j];
            const double jitter = scale_jitter * (2.0 * rng.uniform() - 1.0);
            view[j] = src[j] * (1.0 + jitter) + noise * rng.normal();
        }
    }
    out.pairing.resize(static_cast<std::size_t>(2 * n));
    for (int i = 0; i < n; ++i) {
        out.pairing[static_cast<std::size_t>(i)] = n + i;
        out.pairing[static_cast<std::size_t>(n + i)] = i;
    }
    return out;
}

Gradients project_gradients(Gradients grads, const BasisMemory& mem) {
    if (grads.weight_grads.size() != mem.layers.size())
        throw contract_error("project_gradients: layer count mismatch");
    for (std::size_t l = 0; l < mem.layers.size(); ++l) {
        const BasisLayer& layer = mem.layers[l];
        if (layer.count() == 0) continue;
        Matrix& g = grads.weight_grads[l];
        if (layer.full()) {
            // S spans the whole input space, the projector is the identity
            g = Matrix(g.rows, g.cols);
            continue;
        }
        Matrix coords = matmul(g, layer.basis);        // grad * S
        Matrix proj = matmul_nt(coords, layer.basis);  // (grad * S) * S^T
        axpy(g, proj, -1.0);
    }
    return grads;
}

namespace {

struct StepOutcome {
    double loss = 0.0;
    double alignment = 0.0;  // |alpha * grad * S|_max after projection
};

// Contrastive term over the pairs whose embeddings are both non-degenerate.
// A fully dead ReLU row has no direction and cannot enter Eq.-style cosine
// terms; its pair is dropped for this batch and its gradient stays zero.
LossValue gated_contrastive(const ForwardTrace& trace, const std::vector<int>& pairing,
                            double mu) {
    const int n2 = trace.embedding.rows;
    const int n = n2 / 2;
    std::vector<int> sources;
    for (int i = 0; i < n; ++i) {
        const double a = trace.embedding_norms[static_cast<std::size_t>(i)];
        const double b = trace.embedding_norms[static_cast<std::size_t>(pairing[static_cast<std::size_t>(i)])];
        if (a > 1e-12 && b > 1e-12) sources.push_back(i);
    }
    LossValue out;
    out.grad = Matrix(n2, trace.embedding.cols);
    if (sources.empty()) return out;

    const int k = static_cast<int>(sources.size());
    Matrix compact(2 * k, trace.embedding.cols);
    std::vector<int> compact_pairing(static_cast<std::size_t>(2 * k));
    for (int s = 0; s < k; ++s) {
        const int src = sources[static_cast<std::size_t>(s)];
        const int view = pairing[static_cast<std::size_t>(src)];
        for (int j = 0; j < compact.cols; ++j) {
            compact.at(s, j) = trace.embedding.at(src, j);
            compact.at(k + s, j) = trace.embedding.at(view, j);
        }
        compact_pairing[static_cast<std::size_t>(s)] = k + s;
        compact_pairing[static_cast<std::size_t>(k + s)] = s;
    }
    const LossValue inner = contrastive_loss(compact, compact_pairing, mu);
    out.value = inner.value;
    for (int s = 0; s < k; ++s) {
        const int src = sources[static_cast<std::size_t>(s)];
        const int view = pairing[static_cast<std::size_t>(src)];
        for (int j = 0; j < compact.cols; ++j) {
            out.grad.at(src, j) = inner.grad.at(s, j);
            out.grad.at(view, j) = inner.grad.at(k + s, j);
        }
    }
    return out;
}

// One optimizer step on a batch: augment, forward, compound loss, backward,
// optional projection, SGD update.
StepOutcome train_step(Network& net, const Matrix& batch, const std::vector<int>& labels,
                       int task, const BasisMemory& mem, const TrainConfig& config,
                       bool project, std::uint64_t step_seed) {
    AugmentedBatch aug = augment(batch, config.aug_noise, config.aug_scale_jitter, step_seed);
    std::vector<int> labels2 = labels;
    labels2.insert(labels2.end(), labels.begin(), labels.end());

    ForwardTrace trace = forward(net, aug.data, task);
    LossValue ce = cross_entropy(trace.logits, labels2);
    LossValue con;
    if (config.lambda != 0.0) con = gated_contrastive(trace, aug.pairing, config.mu);

    StepOutcome out;
    out.loss = ce.value + config.lambda * con.value;
    if (!std::isfinite(out.loss))
        throw numeric_error("training diverged on task " + std::to_string(task) +
                            ": non-finite loss");

    Gradients grads = backward(net, trace, ce.grad, con.grad, config.lambda);
    if (project) {
        grads = project_gradients(std::move(grads), mem);
        double worst = 0.0;
        for (std::size_t l = 0; l < mem.layers.size(); ++l) {
            if (mem.layers[l].count() == 0) continue;
            const double a = max_abs(matmul(grads.weight_grads[l], mem.layers[l].basis));
            if (a > worst) worst = a;
        }
        out.alignment = config.alpha * worst;
    }
    apply_update(net, grads, config.alpha);
    return out;
}

Matrix gather_rows(const Matrix& x, const std::vector<int>& order, int lo, int hi) {
    Matrix out(hi - lo, x.cols);
    for (int r = lo; r < hi; ++r) {
        const double* src = x.row_ptr(order[static_cast<std::size_t>(r)]);
        double* dst = out.row_ptr(r - lo);
        for (int j = 0; j < x.cols; ++j) dst[j] = src[j];
    }
    return out;
}

std::vector<int> gather_labels(const std::vector<int>& y, const std::vector<int>& order, int lo,
                               int hi) {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(hi - lo));
    for (int r = lo; r < hi; ++r) out.push_back(y[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])]);
    return out;
}

}  // namespace

TaskResult train_task(Network& net, const TaskData& task, const BasisMemory& mem,
                      const TrainConfig& config) {
    config.validate();
    if (task.train_x.rows == 0) throw contract_error("train_task: task has no training data");
    const auto started = std::chrono::steady_clock::now();

    const bool project =
        config.baseline == Baseline::cgp || config.baseline == Baseline::task_level;
    const int n = task.train_x.rows;

    TaskResult result;
    result.task = task.task_id;

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(Rng::mix(config.seed, 0x7261696eull + static_cast<std::uint64_t>(task.task_id)));

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_rng.shuffle(order.data(), order.size());
        double epoch_loss = 0.0;
        int steps = 0;
        for (int lo = 0; lo < n; lo += config.batch_size) {
            const int hi = std::min(n, lo + config.batch_size);
            Matrix batch = gather_rows(task.train_x, order, lo, hi);
            std::vector<int> labels = gather_labels(task.train_y, order, lo, hi);
            const std::uint64_t step_seed =
                Rng::mix(Rng::mix(config.seed, static_cast<std::uint64_t>(task.task_id) * 65537u +
                                                   static_cast<std::uint64_t>(epoch)),
                         static_cast<std::uint64_t>(lo));
            StepOutcome step =
                train_step(net, batch, labels, task.task_id, mem, config, project, step_seed);
            epoch_loss += step.loss;
            if (step.alignment > result.max_update_alignment)
                result.max_update_alignment = step.alignment;
            ++steps;
        }
        result.epoch_losses.push_back(steps > 0 ? epoch_loss / steps : 0.0);
    }
    result.final_loss = result.epoch_losses.empty() ? 0.0 : result.epoch_losses.back();
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

ConsolidationReport consolidate_task(const Network& net, const TaskData& task, BasisMemory& mem,
                                     PrototypeMemory& protos, const TrainConfig& config,
                                     bool first_task) {
    ConsolidationReport report;
    const int classes = static_cast<int>(task.class_ids.size());

    if (config.baseline == Baseline::task_level) {
        // one task-wide representation, GPM style: no class split, no gating
        std::vector<Matrix> layer_reps;
        for (int c = 0; c < classes; ++c) {
            ClassRepresentation rep = extract_class_representation(
                net, task.train_x, task.train_y, task.task_id, c,
                task.class_ids[static_cast<std::size_t>(c)], config.mode, config.n_r);
            if (layer_reps.empty()) {
                layer_reps = std::move(rep.layer_reps);
            } else {
                for (std::size_t l = 0; l < layer_reps.size(); ++l)
                    layer_reps[l] = hstack(layer_reps[l], rep.layer_reps[l]);
            }
        }
        BasisProvenance prov{task.task_id, task.class_ids};
        ConstructResult res = construct_task_bases(layer_reps, mem, prov, config.eps);
        ClassConsolidation cc;
        cc.class_id = task.class_ids.empty() ? -1 : task.class_ids.front();
        cc.branch = MergeBranch::fresh;
        cc.new_columns = res.new_columns;
        report.classes.push_back(cc);
        report.saturated = res.saturated;
    } else {
        std::vector<ClassRepresentation> task_reps;
        for (int c = 0; c < classes; ++c) {
            ClassRepresentation rep = extract_class_representation(
                net, task.train_x, task.train_y, task.task_id, c,
                task.class_ids[static_cast<std::size_t>(c)], config.mode, config.n_r);
            ConstructResult res =
                construct_class_bases(rep, mem, protos, config.eps, config.eta,
                                      first_task ? &task_reps : nullptr);
            ClassConsolidation cc;
            cc.class_id = rep.class_id;
            cc.branch = res.branch;
            cc.matched_class = res.matched_class;
            cc.max_similarity = res.max_similarity;
            cc.new_columns = res.new_columns;
            cc.shared_columns = res.shared_columns;
            report.classes.push_back(cc);
            report.saturated = report.saturated || res.saturated;
            task_reps.push_back(std::move(rep));
        }
    }

    for (const BasisLayer& layer : mem.layers) {
        const double defect = orthonormality_defect(layer.basis);
        if (defect > report.ortho_defect) report.ortho_defect = defect;
    }
    return report;
}

namespace {

void multitask_train(Network& net, const TaskStream& stream, const TrainConfig& config) {
    std::vector<std::vector<int>> orders;
    for (const TaskData& task : stream.tasks) {
        std::vector<int> order(static_cast<std::size_t>(task.train_x.rows));
        std::iota(order.begin(), order.end(), 0);
        orders.push_back(std::move(order));
    }
    BasisMemory unused;
    Rng shuffle_rng(Rng::mix(config.seed, 0x6d756c7469ull));
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t t = 0; t < stream.tasks.size(); ++t) {
            const TaskData& task = stream.tasks[t];
            std::vector<int>& order = orders[t];
            shuffle_rng.shuffle(order.data(), order.size());
            const int n = task.train_x.rows;
            for (int lo = 0; lo < n; lo += config.batch_size) {
                const int hi = std::min(n, lo + config.batch_size);
                Matrix batch = gather_rows(task.train_x, order, lo, hi);
                std::vector<int> labels = gather_labels(task.train_y, order, lo, hi);
                const std::uint64_t step_seed = Rng::mix(
                    Rng::mix(config.seed, 0xabcd0000ull + static_cast<std::uint64_t>(t) * 65537u +
                                              static_cast<std::uint64_t>(epoch)),
                    static_cast<std::uint64_t>(lo));
                train_step(net, batch, labels, task.task_id, unused, config, false, step_seed);
            }
        }
    }
}

}  // namespace

RunResult run_sequence(const NetworkConfig& net_config, const TrainConfig& train_config,
                       const TaskStream& stream) {
    train_config.validate();
    if (stream.tasks.empty()) throw contract_error("run_sequence: empty task stream");
    NetworkConfig nc = net_config;
    nc.num_tasks = stream.num_tasks();
    nc.classes_per_task = stream.classes_per_task;

    RunResult run;
    run.net = make_network(nc);
    run.memory = BasisMemory::for_network(nc);
    run.accuracy = AccuracyMatrix::with_tasks(stream.num_tasks());

    if (train_config.baseline == Baseline::multitask) {
        multitask_train(run.net, stream, train_config);
        for (const TaskData& task : stream.tasks) run.net.freeze_head(task.task_id);
        std::vector<AccuracyCell> final_cells;
        for (const TaskData& task : stream.tasks)
            final_cells.push_back(evaluate(run.net, task.test_x, task.test_y, task.task_id));
        for (int t = 0; t < stream.num_tasks(); ++t) {
            TaskResult result;
            result.task = t;
            for (const BasisLayer& layer : run.memory.layers)
                result.memory_columns.push_back(layer.count());
            run.tasks.push_back(std::move(result));
            for (int i = 0; i <= t; ++i)
                run.accuracy.set(t, i, final_cells[static_cast<std::size_t>(i)]);
        }
        return run;
    }

    for (const TaskData& task : stream.tasks) {
        TaskResult result = train_task(run.net, task, run.memory, train_config);
        if (train_config.baseline != Baseline::finetune) {
            result.consolidation =
                consolidate_task(run.net, task, run.memory, run.prototypes, train_config,
                                 task.task_id == stream.tasks.front().task_id);
            if (result.consolidation.ortho_defect > run.max_ortho_defect)
                run.max_ortho_defect = result.consolidation.ortho_defect;
        }
        run.net.freeze_head(task.task_id);
        for (const BasisLayer& layer : run.memory.layers)
            result.memory_columns.push_back(layer.count());
        if (result.max_update_alignment > run.max_update_alignment)
            run.max_update_alignment = result.max_update_alignment;

        for (int i = 0; i <= task.task_id; ++i) {
            const TaskData& seen = stream.tasks[static_cast<std::size_t>(i)];
            run.accuracy.set(task.task_id, i,
                             evaluate(run.net, seen.test_x, seen.test_y, seen.task_id));
        }
        run.tasks.push_back(std::move(result));
    }
    return run;
}

}  // namespace cgp
