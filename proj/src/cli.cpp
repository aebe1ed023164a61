#include "cgp/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <vector>

#include "cgp/artifacts.hpp"
#include "cgp/config.hpp"
#include "cgp/error.hpp"
#include "cgp/io_util.hpp"
#include "cgp/snapshot.hpp"
#include "cgp/version.hpp"

namespace cgp::cli {

namespace {

namespace fs = std::filesystem;

struct SeedOutcome {
    AccBwt metrics;
    bool ok = false;
};

// Full single-seed run: stream, training, artifact files under out_dir.
AccBwt run_one_seed(const RunConfig& cfg, std::uint64_t seed, const std::string& out_dir,
                    int verbosity) {
    fs::create_directories(out_dir);

    TaskStream stream = build_stream(cfg.data, seed);
    NetworkConfig net_config;
    net_config.layer_sizes = cfg.layer_sizes;
    net_config.seed = derive_network_seed(seed);
    TrainConfig train_config = cfg.train;
    train_config.seed = derive_train_seed(seed);

    RunResult run = run_sequence(net_config, train_config, stream);

    atomic_write_text(out_dir + "/accuracy.csv", accuracy_csv(run.accuracy));
    atomic_write_text(out_dir + "/loss.csv", loss_csv(run.tasks));
    atomic_write_text(out_dir + "/stats.csv",
                      run_stats_csv(run.tasks, static_cast<int>(run.memory.layers.size())));
    atomic_write_text(out_dir + "/consolidation.csv", consolidation_csv(run.tasks));
    atomic_write_text(out_dir + "/plot.svg", accuracy_curve_svg(run.accuracy));
    save_memory_snapshot(out_dir + "/memory.cgpmem", run.memory, run.prototypes);
    save_network_snapshot(out_dir + "/network.cgpnet", run.net);

    const AccBwt metrics = acc_bwt(run.accuracy);
    if (verbosity > 0) {
        std::printf("seed %llu: ACC %s%%  BWT %s%%  (alignment %.2e, defect %.2e)\n",
                    static_cast<unsigned long long>(seed), format_percent(metrics.acc).c_str(),
                    metrics.bwt_defined ? format_percent(metrics.bwt).c_str() : "na",
                    run.max_update_alignment, run.max_ortho_defect);
        std::fflush(stdout);
    }
    return metrics;
}

int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const config_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
}

std::string trimmed_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

}  // namespace

int cmd_run(const std::string& config_path, const std::string& output_dir_override,
            std::optional<std::uint64_t> seed_override, int verbosity) {
    return guarded([&]() -> int {
        RunConfig cfg = parse_run_config(config_path);
        if (seed_override) cfg.seeds = {*seed_override};
        std::string out = !output_dir_override.empty() ? output_dir_override
                          : !cfg.output_dir.empty()    ? cfg.output_dir
                                                       : ("out_" + cfg.name);
        fs::create_directories(out);
        atomic_write_text(out + "/manifest.json", run_config_to_json(cfg));

        std::vector<SummaryRow> rows;
        SummaryRow row;
        row.variant = cfg.name;
        for (std::uint64_t seed : cfg.seeds) {
            const AccBwt m =
                run_one_seed(cfg, seed, out + "/seed_" + std::to_string(seed), verbosity);
            row.acc.push_back(m.acc);
            row.bwt.push_back(m.bwt);
            row.bwt_defined.push_back(m.bwt_defined);
        }
        rows.push_back(std::move(row));
        atomic_write_text(out + "/summary.csv", summary_csv(rows, cfg.seeds));
        return kExitOk;
    });
}

int cmd_ablate(const std::string& config_path, const std::string& axis,
               const std::string& output_dir_override, int verbosity) {
    return guarded([&]() -> int {
        RunConfig base = parse_run_config(config_path);
        struct Variant {
            std::string name;
            RunConfig cfg;
        };
        std::vector<Variant> variants;

        if (axis == "components") {
            // finetune -> CGP -> +BR -> +Con, the ablation-table structure
            RunConfig v = base;
            v.train.baseline = Baseline::finetune;
            variants.push_back({"finetune", v});
            v = base;
            v.train.baseline = Baseline::cgp;
            v.train.eta = 1.0;  // merging disabled: similarity can never exceed 1
            v.train.lambda = 0.0;
            variants.push_back({"cgp", v});
            v = base;
            v.train.baseline = Baseline::cgp;
            v.train.lambda = 0.0;
            variants.push_back({"cgp_br", v});
            v = base;
            v.train.baseline = Baseline::cgp;
            variants.push_back({"cgp_br_con", v});
        } else if (axis == "eta") {
            for (double eta : {0.5, 0.6, 0.7, 0.8, 0.9, 1.0}) {
                RunConfig v = base;
                v.train.baseline = Baseline::cgp;
                v.train.eta = eta;
                variants.push_back({"eta_" + trimmed_number(eta), v});
            }
        } else if (axis == "lambda") {
            for (double lambda : {0.0, 0.1, 0.3, 0.5, 0.7, 1.0}) {
                RunConfig v = base;
                v.train.baseline = Baseline::cgp;
                v.train.lambda = lambda;
                variants.push_back({"lambda_" + trimmed_number(lambda), v});
            }
        } else if (axis == "n_r") {
            for (const char* mode : {"br-std", "br-gtl"}) {
                for (int n_r : {8, 16, 32}) {
                    RunConfig v = base;
                    v.train.baseline = Baseline::cgp;
                    v.train.mode = std::string(mode) == "br-std" ? RepresentationMode::br_std
                                                                 : RepresentationMode::br_gtl;
                    v.train.n_r = n_r;
                    variants.push_back({std::string(mode) + "_nr" + std::to_string(n_r), v});
                }
            }
        } else {
            throw config_error("unknown ablation axis '" + axis +
                               "' (components|eta|lambda|n_r)");
        }

        std::string out = !output_dir_override.empty() ? output_dir_override
                          : !base.output_dir.empty()   ? base.output_dir
                                                       : ("out_" + base.name + "_" + axis);
        fs::create_directories(out);
        atomic_write_text(out + "/manifest.json", run_config_to_json(base));

        std::vector<SummaryRow> rows;
        for (const Variant& variant : variants) {
            if (verbosity > 0) {
                std::printf("variant %s\n", variant.name.c_str());
                std::fflush(stdout);
            }
            SummaryRow row;
            row.variant = variant.name;
            for (std::uint64_t seed : base.seeds) {
                const AccBwt m = run_one_seed(variant.cfg, seed,
                                              out + "/" + variant.name + "/seed_" +
                                                  std::to_string(seed),
                                              verbosity);
                row.acc.push_back(m.acc);
                row.bwt.push_back(m.bwt);
                row.bwt_defined.push_back(m.bwt_defined);
            }
            rows.push_back(std::move(row));
        }
        atomic_write_text(out + "/summary.csv", summary_csv(rows, base.seeds));
        return kExitOk;
    });
}

int cmd_inspect(const std::string& snapshot_path, bool as_csv) {
    return guarded([&]() -> int {
        MemorySnapshot snap = load_memory_snapshot(snapshot_path);
        if (as_csv) {
            std::fputs(memory_report_csv(snap).c_str(), stdout);
            return kExitOk;
        }
        std::printf("memory snapshot: %s\n", snapshot_path.c_str());
        std::printf("layers: %zu, prototypes: %zu\n", snap.memory.layers.size(),
                    snap.prototypes.items.size());
        for (std::size_t l = 0; l < snap.memory.layers.size(); ++l) {
            const BasisLayer& layer = snap.memory.layers[l];
            const double frac = layer.dim > 0 ? static_cast<double>(layer.count()) / layer.dim : 0.0;
            std::printf("layer %zu: %d/%d bases (%.1f%% of dimension)%s\n", l, layer.count(),
                        layer.dim, frac * 100.0, layer.full() ? "  SATURATED" : "");
            std::map<std::string, int> groups;
            for (const BasisProvenance& p : layer.provenance) {
                std::string key = "task " + std::to_string(p.task) + " classes {";
                for (std::size_t i = 0; i < p.classes.size(); ++i)
                    key += (i ? "," : "") + std::to_string(p.classes[i]);
                key += "}";
                groups[key]++;
            }
            for (const auto& [key, count] : groups)
                std::printf("    %-40s %d column%s\n", key.c_str(), count, count == 1 ? "" : "s");
        }
        for (const Prototype& p : snap.prototypes.items)
            std::printf("prototype: class %d (task %d), dim %zu\n", p.class_id, p.task,
                        p.values.size());
        return kExitOk;
    });
}

}  // namespace cgp::cli
