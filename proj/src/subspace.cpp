#include "cgp/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <string>

#include "cgp/error.hpp"
#include "cgp/svd.hpp"

namespace cgp {

namespace {

constexpr double kDegenerateNorm = 1e-12;

// smallest k with offset + cumsum(energies[0..k)) >= eps * total
int smallest_k_energy(const std::vector<double>& energies, double offset, double total,
                      double eps) {
    const double target = eps * total;
    double cum = offset;
    if (cum >= target) return 0;
    for (std::size_t k = 0; k < energies.size(); ++k) {
        cum += energies[k];
        if (cum >= target) return static_cast<int>(k) + 1;
    }
    return static_cast<int>(energies.size());
}

// One re-orthogonalization pass against the stored basis before appending;
// keeps the memory defect from drifting over long class sequences.
std::vector<double> reorthogonalized_column(const BasisLayer& layer, const Matrix& u, int col) {
    std::vector<double> v = column(u, col);
    if (layer.count() == 0) return v;
    const Matrix& s = layer.basis;
    std::vector<double> proj(static_cast<std::size_t>(s.cols), 0.0);
    for (int j = 0; j < s.cols; ++j) {
        double acc = 0.0;
        for (int i = 0; i < s.rows; ++i) acc += s.at(i, j) * v[static_cast<std::size_t>(i)];
        proj[static_cast<std::size_t>(j)] = acc;
    }
    for (int i = 0; i < s.rows; ++i) {
        double acc = 0.0;
        for (int j = 0; j < s.cols; ++j) acc += s.at(i, j) * proj[static_cast<std::size_t>(j)];
        v[static_cast<std::size_t>(i)] -= acc;
    }
    double nrm2 = 0.0;
    for (double x : v) nrm2 += x * x;
    if (nrm2 <= 0.25) return {};  // lost too much mass: direction already covered
    const double inv = 1.0 / std::sqrt(nrm2);
    for (double& x : v) x *= inv;
    return v;
}

// Append up to k leading residual-SVD directions, honoring the capacity cap.
void append_bases(BasisLayer& layer, const Matrix& u, int k, const BasisProvenance& prov,
                  int& appended, bool& saturated) {
    for (int j = 0; j < k; ++j) {
        if (layer.full()) {
            saturated = true;
            return;
        }
        std::vector<double> col = reorthogonalized_column(layer, u, j);
        if (col.empty()) continue;
        append_column(layer.basis, col);
        layer.provenance.push_back(prov);
        ++appended;
    }
}

void remove_columns(BasisLayer& layer, const std::vector<int>& cols) {
    if (cols.empty()) return;
    std::set<int> drop(cols.begin(), cols.end());
    Matrix next(layer.dim, layer.count() - static_cast<int>(drop.size()));
    std::vector<BasisProvenance> prov;
    int out = 0;
    for (int j = 0; j < layer.count(); ++j) {
        if (drop.count(j)) continue;
        for (int i = 0; i < layer.dim; ++i) next.at(i, out) = layer.basis.at(i, j);
        prov.push_back(layer.provenance[static_cast<std::size_t>(j)]);
        ++out;
    }
    if (next.cols == 0) next = Matrix();
    layer.basis = std::move(next);
    layer.provenance = std::move(prov);
}

std::vector<int> merged_class_union(const std::vector<int>& a, int extra) {
    std::set<int> s(a.begin(), a.end());
    s.insert(extra);
    return std::vector<int>(s.begin(), s.end());
}

}  // namespace

BasisMemory BasisMemory::for_network(const NetworkConfig& config) {
    BasisMemory mem;
    for (int l = 0; l < config.num_layers(); ++l) {
        BasisLayer layer;
        layer.dim = config.layer_sizes[static_cast<std::size_t>(l)] + 1;  // + bias
        mem.layers.push_back(std::move(layer));
    }
    return mem;
}

int BasisMemory::total_columns() const {
    int n = 0;
    for (const auto& l : layers) n += l.count();
    return n;
}

std::vector<double> compute_prototype(const Matrix& embeddings) {
    if (embeddings.rows < 1) throw contract_error("compute_prototype: no embeddings");
    std::vector<double> mean(static_cast<std::size_t>(embeddings.cols), 0.0);
    for (int i = 0; i < embeddings.rows; ++i) {
        const double* row = embeddings.row_ptr(i);
        for (int j = 0; j < embeddings.cols; ++j) mean[static_cast<std::size_t>(j)] += row[j];
    }
    double nrm2 = 0.0;
    for (double& v : mean) {
        v /= embeddings.rows;
        nrm2 += v * v;
    }
    const double nrm = std::sqrt(nrm2);
    if (nrm < kDegenerateNorm)
        throw numeric_error("degenerate prototype: mean embedding is the zero vector");
    for (double& v : mean) v /= nrm;
    return mean;
}

double similarity(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw contract_error("similarity: dimension mismatch");
    return dot(p, q);
}

int k_rank_first(const std::vector<double>& sigma, double eps) {
    if (sigma.empty()) throw contract_error("k_rank_first: empty sigma");
    if (eps <= 0.0 || eps > 1.0) throw contract_error("k_rank_first: eps must be in (0, 1]");
    std::vector<double> energies(sigma.size());
    double total = 0.0;
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        energies[i] = sigma[i] * sigma[i];
        total += energies[i];
    }
    return smallest_k_energy(energies, 0.0, total, eps);
}

int k_rank_residual(const std::vector<double>& sigma_residual, double proj_energy,
                    double total_energy, double eps) {
    if (eps <= 0.0 || eps > 1.0) throw contract_error("k_rank_residual: eps must be in (0, 1]");
    std::vector<double> energies(sigma_residual.size());
    double split = proj_energy;
    for (std::size_t i = 0; i < sigma_residual.size(); ++i) {
        energies[i] = sigma_residual[i] * sigma_residual[i];
        split += energies[i];
    }
    const double scale = std::max(std::fabs(total_energy), 1e-30);
    if (std::fabs(split - total_energy) > 1e-6 * scale)
        throw numeric_error("k_rank_residual: energy split does not add up (" +
                            std::to_string(split) + " vs " + std::to_string(total_energy) + ")");
    return smallest_k_energy(energies, proj_energy, total_energy, eps);
}

Residual residualize(const Matrix& c, const Matrix& s) {
    Residual r;
    if (s.cols == 0) {
        r.c_hat = c;
        r.proj_energy = 0.0;
        return r;
    }
    if (s.rows != c.rows) throw contract_error("residualize: dimension mismatch");
    Matrix coords = matmul_tn(s, c);            // S^T C
    r.proj_energy = frobenius_norm_sq(coords);  // == |S S^T C|_F^2 for orthonormal S
    Matrix proj = matmul(s, coords);
    r.c_hat = add_scaled(c, proj, -1.0);
    return r;
}

std::vector<double> common_base_energies(const Matrix& c, const Matrix& s) {
    if (s.cols == 0) throw contract_error("common_base_energies: empty basis");
    Matrix coords = matmul_tn(s, c);  // k x n
    std::vector<double> energies(static_cast<std::size_t>(coords.rows), 0.0);
    for (int i = 0; i < coords.rows; ++i) {
        const double* row = coords.row_ptr(i);
        double acc = 0.0;
        for (int j = 0; j < coords.cols; ++j) acc += row[j] * row[j];
        energies[static_cast<std::size_t>(i)] = acc;
    }
    return energies;
}

ClassRepresentation extract_class_representation(const Network& net, const Matrix& samples,
                                                 const std::vector<int>& labels, int task,
                                                 int label, int global_class_id,
                                                 RepresentationMode mode, int n_r) {
    if (n_r <= 0) throw contract_error("extract_class_representation: n_r must be positive");
    std::vector<int> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == label) members.push_back(static_cast<int>(i));
    if (members.empty())
        throw contract_error("extract_class_representation: no samples with label " +
                             std::to_string(label));

    Matrix class_batch(static_cast<int>(members.size()), samples.cols);
    for (std::size_t r = 0; r < members.size(); ++r) {
        const double* src = samples.row_ptr(members[r]);
        double* dst = class_batch.row_ptr(static_cast<int>(r));
        for (int j = 0; j < samples.cols; ++j) dst[j] = src[j];
    }
    ForwardTrace trace = forward(net, class_batch, task);

    std::vector<int> selected;
    if (mode == RepresentationMode::br_gtl) {
        for (int i = 0; i < trace.logits.rows && static_cast<int>(selected.size()) < n_r; ++i) {
            const double* row = trace.logits.row_ptr(i);
            int arg = 0;
            for (int c = 1; c < trace.logits.cols; ++c)
                if (row[c] > row[arg]) arg = c;
            if (arg == label) selected.push_back(i);
        }
        if (selected.empty()) {
            std::fprintf(stderr,
                         "warning: class %d has no correctly predicted samples, "
                         "falling back to BR-STD selection\n",
                         global_class_id);
        }
    }
    if (selected.empty()) {
        const int take = std::min<int>(n_r, trace.logits.rows);
        for (int i = 0; i < take; ++i) selected.push_back(i);
    }

    ClassRepresentation rep;
    rep.class_id = global_class_id;
    rep.task = task;
    for (const Matrix& layer_in : trace.layer_inputs) {
        Matrix c(layer_in.cols, static_cast<int>(selected.size()));
        for (std::size_t k = 0; k < selected.size(); ++k) {
            const double* src = layer_in.row_ptr(selected[k]);
            for (int d = 0; d < layer_in.cols; ++d) c.at(d, static_cast<int>(k)) = src[d];
        }
        rep.layer_reps.push_back(std::move(c));
    }
    Matrix emb(static_cast<int>(selected.size()), trace.embedding.cols);
    for (std::size_t k = 0; k < selected.size(); ++k) {
        const double* src = trace.embedding.row_ptr(selected[k]);
        double* dst = emb.row_ptr(static_cast<int>(k));
        for (int j = 0; j < emb.cols; ++j) dst[j] = src[j];
    }
    rep.prototype = compute_prototype(emb);
    return rep;
}

namespace {

// fresh / concat construction: residualize against the stored bases, SVD the
// residual, keep the first k directions by the residual k-rank criterion.
void construct_from_representation(const std::vector<Matrix>& layer_reps, BasisMemory& mem,
                                   const BasisProvenance& prov, double eps,
                                   ConstructResult& result) {
    for (std::size_t l = 0; l < mem.layers.size(); ++l) {
        BasisLayer& layer = mem.layers[l];
        const Matrix& c = layer_reps[l];
        if (layer.full()) {
            result.saturated = true;
            continue;
        }
        Residual res = residualize(c, layer.basis);
        const double total = frobenius_norm_sq(c);
        SvdResult sv = svd(res.c_hat);
        const int k = k_rank_residual(sv.sigma, res.proj_energy, total, eps);
        append_bases(layer, sv.u, k, prov, result.new_columns, result.saturated);
    }
}

}  // namespace

ConstructResult construct_class_bases(const ClassRepresentation& rep, BasisMemory& mem,
                                      PrototypeMemory& protos, double eps, double eta,
                                      const std::vector<ClassRepresentation>* first_task_reps) {
    if (rep.layer_reps.size() != mem.layers.size())
        throw contract_error("construct_class_bases: representation/memory layer count mismatch");

    ConstructResult result;
    int best = -1;
    for (std::size_t i = 0; i < protos.items.size(); ++i) {
        const double sim = similarity(rep.prototype, protos.items[i].values);
        if (sim > result.max_similarity) {
            result.max_similarity = sim;
            best = static_cast<int>(i);
        }
    }
    const bool similar = best >= 0 && result.max_similarity > eta;
    if (best >= 0) result.matched_class = protos.items[static_cast<std::size_t>(best)].class_id;

    if (!similar) {
        result.branch = MergeBranch::fresh;
        construct_from_representation(rep.layer_reps, mem,
                                      BasisProvenance{rep.task, {rep.class_id}}, eps, result);
        protos.items.push_back(Prototype{rep.class_id, rep.task, rep.prototype});
        return result;
    }

    const int matched = result.matched_class;
    const ClassRepresentation* matched_rep = nullptr;
    if (first_task_reps) {
        for (const auto& r : *first_task_reps)
            if (r.class_id == matched) {
                matched_rep = &r;
                break;
            }
    }

    if (matched_rep) {
        // first-task pair merge: rebuild the matched class's columns from the
        // concatenated representations
        result.branch = MergeBranch::merged_concat;
        std::set<int> merged_set{matched};
        for (const BasisLayer& layer : mem.layers)
            for (const BasisProvenance& p : layer.provenance)
                if (std::find(p.classes.begin(), p.classes.end(), matched) != p.classes.end())
                    merged_set.insert(p.classes.begin(), p.classes.end());
        for (BasisLayer& layer : mem.layers) {
            std::vector<int> drop;
            for (int j = 0; j < layer.count(); ++j)
                for (int c : layer.provenance[static_cast<std::size_t>(j)].classes)
                    if (merged_set.count(c)) {
                        drop.push_back(j);
                        break;
                    }
            remove_columns(layer, drop);
        }
        std::vector<int> merged_classes(merged_set.begin(), merged_set.end());
        std::vector<int> prov_classes = merged_classes;
        prov_classes.push_back(rep.class_id);
        std::sort(prov_classes.begin(), prov_classes.end());

        // concat this class with every class folded into the dropped columns
        std::vector<Matrix> concat = rep.layer_reps;
        std::sort(merged_classes.begin(), merged_classes.end());
        for (int cls : merged_classes) {
            for (const auto& r : *first_task_reps) {
                if (r.class_id != cls) continue;
                for (std::size_t l = 0; l < concat.size(); ++l)
                    concat[l] = hstack(concat[l], r.layer_reps[l]);
            }
        }
        construct_from_representation(concat, mem, BasisProvenance{rep.task, prov_classes}, eps,
                                      result);
        protos.items.push_back(Prototype{rep.class_id, rep.task, rep.prototype});
        return result;
    }

    // shared-base selection: rank stored-base energies against novel residual
    // directions and keep the top-k, with k from the class's own k-rank cut
    result.branch = MergeBranch::merged_shared;
    for (std::size_t l = 0; l < mem.layers.size(); ++l) {
        BasisLayer& layer = mem.layers[l];
        const Matrix& c = rep.layer_reps[l];

        if (layer.count() == 0) {
            // nothing stored at this layer: degenerate to the fresh path
            if (layer.full()) {
                result.saturated = true;
                continue;
            }
            SvdResult sv = svd(c);
            const int k = k_rank_first(sv.sigma, eps);
            append_bases(layer, sv.u, k, BasisProvenance{rep.task, {rep.class_id}},
                         result.new_columns, result.saturated);
            continue;
        }

        std::vector<double> shared_energy = common_base_energies(c, layer.basis);
        Residual res = residualize(c, layer.basis);
        SvdResult sv = svd(res.c_hat);

        struct Entry {
            double energy;
            bool is_new;
            int index;
        };
        std::vector<Entry> entries;
        entries.reserve(shared_energy.size() + sv.sigma.size());
        for (std::size_t i = 0; i < shared_energy.size(); ++i)
            entries.push_back(Entry{shared_energy[i], false, static_cast<int>(i)});
        for (std::size_t i = 0; i < sv.sigma.size(); ++i)
            entries.push_back(Entry{sv.sigma[i] * sv.sigma[i], true, static_cast<int>(i)});
        std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
            if (a.energy != b.energy) return a.energy > b.energy;
            if (a.is_new != b.is_new) return !a.is_new;  // existing bases win ties
            return a.index < b.index;
        });

        // k comes from the class's own spectrum; stored bases competing in
        // the ranked list then crowd out novel directions, which is what
        // makes merging cheaper (and slightly lossier) than a fresh append
        const SvdResult sv_own = svd(c);
        const int k = std::min(k_rank_first(sv_own.sigma, eps),
                               static_cast<int>(entries.size()));

        const BasisProvenance prov{rep.task,
                                   merged_class_union({matched}, rep.class_id)};
        for (int i = 0; i < k; ++i) {
            const Entry& e = entries[static_cast<std::size_t>(i)];
            if (e.is_new) {
                if (layer.full()) {
                    result.saturated = true;
                    continue;
                }
                std::vector<double> col = reorthogonalized_column(layer, sv.u, e.index);
                if (col.empty()) continue;
                append_column(layer.basis, col);
                layer.provenance.push_back(prov);
                ++result.new_columns;
            } else {
                auto& cls = layer.provenance[static_cast<std::size_t>(e.index)].classes;
                if (std::find(cls.begin(), cls.end(), rep.class_id) == cls.end()) {
                    cls.push_back(rep.class_id);
                    std::sort(cls.begin(), cls.end());
                }
                ++result.shared_columns;
            }
        }
    }
    protos.items.push_back(Prototype{rep.class_id, rep.task, rep.prototype});
    return result;
}

ConstructResult construct_task_bases(const std::vector<Matrix>& layer_reps, BasisMemory& mem,
                                     const BasisProvenance& prov, double eps) {
    if (layer_reps.size() != mem.layers.size())
        throw contract_error("construct_task_bases: layer count mismatch");
    ConstructResult result;
    construct_from_representation(layer_reps, mem, prov, eps, result);
    return result;
}

std::vector<Matrix> merge_first_task_pair(const ClassRepresentation& a,
                                          const ClassRepresentation& b, double eps) {
    if (a.layer_reps.size() != b.layer_reps.size())
        throw contract_error("merge_first_task_pair: layer count mismatch");
    std::vector<Matrix> bases;
    for (std::size_t l = 0; l < a.layer_reps.size(); ++l) {
        Matrix concat = hstack(a.layer_reps[l], b.layer_reps[l]);
        SvdResult sv = svd(concat);
        const int k = k_rank_first(sv.sigma, eps);
        Matrix out(concat.rows, k);
        for (int j = 0; j < k; ++j)
            for (int i = 0; i < concat.rows; ++i) out.at(i, j) = sv.u.at(i, j);
        bases.push_back(std::move(out));
    }
    return bases;
}

}  // namespace cgp
