#include "cgp/config.hpp"

#include <json.hpp>
#include <set>

#include "cgp/error.hpp"
#include "cgp/io_util.hpp"
#include "cgp/rng.hpp"
#include "cgp/version.hpp"

namespace cgp {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& item : obj.items())
        if (!allowed.count(item.key()))
            throw config_error("unknown key '" + item.key() + "' in " + where);
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw config_error("key '" + key + "' has the wrong type");
    }
}

template <typename T>
T get_required(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw config_error("missing key '" + key + "' in " + where);
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw config_error("key '" + key + "' in " + where + " has the wrong type");
    }
}

Baseline parse_baseline(const std::string& s) {
    if (s == "cgp") return Baseline::cgp;
    if (s == "finetune") return Baseline::finetune;
    if (s == "task_level") return Baseline::task_level;
    if (s == "multitask") return Baseline::multitask;
    throw config_error("unknown baseline '" + s + "' (cgp|finetune|task_level|multitask)");
}

RepresentationMode parse_mode(const std::string& s) {
    if (s == "br-std") return RepresentationMode::br_std;
    if (s == "br-gtl") return RepresentationMode::br_gtl;
    throw config_error("unknown mode '" + s + "' (br-std|br-gtl)");
}

}  // namespace

const char* baseline_name(Baseline b) {
    switch (b) {
        case Baseline::cgp: return "cgp";
        case Baseline::finetune: return "finetune";
        case Baseline::task_level: return "task_level";
        case Baseline::multitask: return "multitask";
    }
    return "?";
}

const char* mode_name(RepresentationMode m) {
    return m == RepresentationMode::br_std ? "br-std" : "br-gtl";
}

void RunConfig::validate() const {
    if (seeds.empty()) throw config_error("seeds must not be empty");
    if (layer_sizes.size() < 2) throw config_error("network.layer_sizes needs >= 2 entries");
    for (int d : layer_sizes)
        if (d <= 0) throw config_error("network.layer_sizes entries must be positive");
    if (data.kind == DataConfig::Kind::synthetic) {
        SyntheticSpec spec = data.synthetic;
        spec.seed = 0;
        spec.validate();
        if (spec.input_dim != layer_sizes.front())
            throw config_error("data.input_dim " + std::to_string(spec.input_dim) +
                               " does not match network.layer_sizes[0] " +
                               std::to_string(layer_sizes.front()));
    } else {
        if (data.train_images.empty() || data.train_labels.empty() || data.test_images.empty() ||
            data.test_labels.empty())
            throw config_error("idx data needs train/test image and label paths");
        if (data.classes_per_task <= 0) throw config_error("classes_per_task must be positive");
    }
    train.validate();
}

RunConfig parse_run_config_text(const std::string& text, const std::string& origin) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw config_error(origin + ": " + e.what());
    }
    if (!root.is_object()) throw config_error(origin + ": top level must be an object");
    check_keys(root, {"name", "seeds", "output_dir", "network", "data", "train", "version"},
               "top level");

    RunConfig cfg;
    cfg.name = get_or<std::string>(root, "name", "run");
    if (root.contains("seeds")) {
        cfg.seeds.clear();
        for (const auto& s : root.at("seeds")) {
            if (!s.is_number_unsigned() && !s.is_number_integer())
                throw config_error("seeds must be integers");
            cfg.seeds.push_back(s.get<std::uint64_t>());
        }
    }
    cfg.output_dir = get_or<std::string>(root, "output_dir", "");

    if (!root.contains("network")) throw config_error("missing 'network' section");
    const json& net = root.at("network");
    check_keys(net, {"layer_sizes"}, "network");
    cfg.layer_sizes = get_required<std::vector<int>>(net, "layer_sizes", "network");

    if (!root.contains("data")) throw config_error("missing 'data' section");
    const json& data = root.at("data");
    const std::string kind = get_or<std::string>(data, "kind", "synthetic");
    if (kind == "synthetic") {
        cfg.data.kind = DataConfig::Kind::synthetic;
        check_keys(data,
                   {"kind", "num_tasks", "classes_per_task", "input_dim", "train_per_class",
                    "test_per_class", "subspace_dim", "mean_scale", "noise", "rho"},
                   "data");
        SyntheticSpec& s = cfg.data.synthetic;
        s.num_tasks = get_or<int>(data, "num_tasks", s.num_tasks);
        s.classes_per_task = get_or<int>(data, "classes_per_task", s.classes_per_task);
        s.input_dim = get_or<int>(data, "input_dim", s.input_dim);
        s.train_per_class = get_or<int>(data, "train_per_class", s.train_per_class);
        s.test_per_class = get_or<int>(data, "test_per_class", s.test_per_class);
        s.subspace_dim = get_or<int>(data, "subspace_dim", s.subspace_dim);
        s.mean_scale = get_or<double>(data, "mean_scale", s.mean_scale);
        s.noise = get_or<double>(data, "noise", s.noise);
        s.rho = get_or<double>(data, "rho", s.rho);
    } else if (kind == "idx") {
        cfg.data.kind = DataConfig::Kind::idx;
        check_keys(data,
                   {"kind", "train_images", "train_labels", "test_images", "test_labels",
                    "classes_per_task", "permutation_seed"},
                   "data");
        cfg.data.train_images = get_required<std::string>(data, "train_images", "data");
        cfg.data.train_labels = get_required<std::string>(data, "train_labels", "data");
        cfg.data.test_images = get_required<std::string>(data, "test_images", "data");
        cfg.data.test_labels = get_required<std::string>(data, "test_labels", "data");
        cfg.data.classes_per_task = get_required<int>(data, "classes_per_task", "data");
        cfg.data.permutation_seed = get_or<std::uint64_t>(data, "permutation_seed", 0);
    } else {
        throw config_error("unknown data.kind '" + kind + "' (synthetic|idx)");
    }

    if (root.contains("train")) {
        const json& tr = root.at("train");
        check_keys(tr,
                   {"alpha", "epochs", "batch_size", "lambda", "mu", "eta", "epsilon", "n_r",
                    "mode", "baseline", "aug_noise", "aug_scale_jitter"},
                   "train");
        TrainConfig& t = cfg.train;
        t.alpha = get_or<double>(tr, "alpha", t.alpha);
        t.epochs = get_or<int>(tr, "epochs", t.epochs);
        t.batch_size = get_or<int>(tr, "batch_size", t.batch_size);
        t.lambda = get_or<double>(tr, "lambda", t.lambda);
        t.mu = get_or<double>(tr, "mu", t.mu);
        t.eta = get_or<double>(tr, "eta", t.eta);
        t.eps = get_or<double>(tr, "epsilon", t.eps);
        t.n_r = get_or<int>(tr, "n_r", t.n_r);
        if (tr.contains("mode")) t.mode = parse_mode(tr.at("mode").get<std::string>());
        if (tr.contains("baseline")) t.baseline = parse_baseline(tr.at("baseline").get<std::string>());
        t.aug_noise = get_or<double>(tr, "aug_noise", t.aug_noise);
        t.aug_scale_jitter = get_or<double>(tr, "aug_scale_jitter", t.aug_scale_jitter);
    }

    cfg.validate();
    return cfg;
}

RunConfig parse_run_config(const std::string& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const io_error& e) {
        throw config_error(e.what());
    }
    return parse_run_config_text(text, path);
}

std::string run_config_to_json(const RunConfig& config) {
    json root;
    root["version"] = kVersion;
    root["name"] = config.name;
    root["seeds"] = config.seeds;
    if (!config.output_dir.empty()) root["output_dir"] = config.output_dir;
    root["network"]["layer_sizes"] = config.layer_sizes;
    json data;
    if (config.data.kind == DataConfig::Kind::synthetic) {
        const SyntheticSpec& s = config.data.synthetic;
        data["kind"] = "synthetic";
        data["num_tasks"] = s.num_tasks;
        data["classes_per_task"] = s.classes_per_task;
        data["input_dim"] = s.input_dim;
        data["train_per_class"] = s.train_per_class;
        data["test_per_class"] = s.test_per_class;
        data["subspace_dim"] = s.subspace_dim;
        data["mean_scale"] = s.mean_scale;
        data["noise"] = s.noise;
        data["rho"] = s.rho;
    } else {
        data["kind"] = "idx";
        data["train_images"] = config.data.train_images;
        data["train_labels"] = config.data.train_labels;
        data["test_images"] = config.data.test_images;
        data["test_labels"] = config.data.test_labels;
        data["classes_per_task"] = config.data.classes_per_task;
        data["permutation_seed"] = config.data.permutation_seed;
    }
    root["data"] = std::move(data);
    json tr;
    tr["alpha"] = config.train.alpha;
    tr["epochs"] = config.train.epochs;
    tr["batch_size"] = config.train.batch_size;
    tr["lambda"] = config.train.lambda;
    tr["mu"] = config.train.mu;
    tr["eta"] = config.train.eta;
    tr["epsilon"] = config.train.eps;
    tr["n_r"] = config.train.n_r;
    tr["mode"] = mode_name(config.train.mode);
    tr["baseline"] = baseline_name(config.train.baseline);
    tr["aug_noise"] = config.train.aug_noise;
    tr["aug_scale_jitter"] = config.train.aug_scale_jitter;
    root["train"] = std::move(tr);
    return root.dump(2) + "\n";
}

std::uint64_t derive_network_seed(std::uint64_t run_seed) { return Rng::mix(run_seed, 0x6e6574ull); }
std::uint64_t derive_data_seed(std::uint64_t run_seed) { return Rng::mix(run_seed, 0x64617461ull); }
std::uint64_t derive_train_seed(std::uint64_t run_seed) { return Rng::mix(run_seed, 0x747261696eull); }

TaskStream build_stream(const DataConfig& data, std::uint64_t run_seed) {
    if (data.kind == DataConfig::Kind::synthetic) {
        SyntheticSpec spec = data.synthetic;
        spec.seed = derive_data_seed(run_seed);
        return generate_synthetic(spec);
    }
    IdxData train = load_idx(data.train_images, data.train_labels);
    IdxData test = load_idx(data.test_images, data.test_labels);
    return split_by_classes(train, test, data.classes_per_task, data.permutation_seed);
}

}  // namespace cgp
