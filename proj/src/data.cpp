#include "cgp/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>

#include "cgp/error.hpp"
#include "cgp/rng.hpp"

namespace cgp {

void SyntheticSpec::validate() const {
    if (num_tasks <= 0 || classes_per_task <= 0 || input_dim <= 0 || subspace_dim <= 0)
        throw config_error("synthetic spec: counts and dimensions must be positive");
    if (train_per_class <= 0 || test_per_class <= 0)
        throw config_error("synthetic spec: sample counts must be positive");
    if (rho < 0.0 || rho > 1.0) throw config_error("synthetic spec: rho must be in [0, 1]");
    const int needed = subspace_dim * (1 + num_tasks * classes_per_task);
    if (needed > input_dim)
        throw config_error("synthetic spec: input_dim " + std::to_string(input_dim) +
                           " too small to host " + std::to_string(num_tasks * classes_per_task) +
                           " orthogonal class subspaces of dimension " +
                           std::to_string(subspace_dim) + " (need " + std::to_string(needed) +
                           ")");
}

TaskStream generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const int total_classes = spec.num_tasks * spec.classes_per_task;
    const int sd = spec.subspace_dim;

    // every class gets its own direction inside the shared block and inside
    // its private block; overlapping tasks therefore reuse the shared
    // subspace without reusing class identities
    auto random_unit = [&rng, sd]() {
        std::vector<double> dir(static_cast<std::size_t>(sd));
        double nrm2 = 0.0;
        for (double& v : dir) {
            v = rng.normal();
            nrm2 += v * v;
        }
        const double inv = 1.0 / std::sqrt(nrm2);
        for (double& v : dir) v *= inv;
        return dir;
    };
    std::vector<std::vector<double>> shared_dirs(static_cast<std::size_t>(total_classes));
    for (auto& dir : shared_dirs) dir = random_unit();
    std::vector<std::vector<double>> own_dirs(static_cast<std::size_t>(total_classes));
    for (auto& dir : own_dirs) dir = random_unit();

    const double w_shared = std::sqrt(spec.rho);
    const double w_own = std::sqrt(1.0 - spec.rho);

    auto draw_sample = [&](int task, int cls_in_task, std::vector<double>& out) {
        const int g = task * spec.classes_per_task + cls_in_task;
        const int own_off = sd * (1 + g);
        std::fill(out.begin(), out.end(), 0.0);
        // mean
        for (int d = 0; d < sd; ++d) {
            out[static_cast<std::size_t>(d)] +=
                spec.mean_scale * w_shared * shared_dirs[static_cast<std::size_t>(g)][static_cast<std::size_t>(d)];
            out[static_cast<std::size_t>(own_off + d)] +=
                spec.mean_scale * w_own * own_dirs[static_cast<std::size_t>(g)][static_cast<std::size_t>(d)];
        }
        // in-subspace noise; both components drawn to keep the stream aligned
        // across rho values
        for (int d = 0; d < sd; ++d) {
            const double ns = rng.normal();
            const double no = rng.normal();
            out[static_cast<std::size_t>(d)] += spec.noise * w_shared * ns;
            out[static_cast<std::size_t>(own_off + d)] += spec.noise * w_own * no;
        }
    };

    TaskStream stream;
    stream.input_dim = spec.input_dim;
    stream.classes_per_task = spec.classes_per_task;
    std::vector<double> sample(static_cast<std::size_t>(spec.input_dim));
    for (int t = 0; t < spec.num_tasks; ++t) {
        TaskData task;
        task.task_id = t;
        task.train_x = Matrix(spec.classes_per_task * spec.train_per_class, spec.input_dim);
        task.test_x = Matrix(spec.classes_per_task * spec.test_per_class, spec.input_dim);
        int train_row = 0, test_row = 0;
        for (int c = 0; c < spec.classes_per_task; ++c) {
            task.class_ids.push_back(t * spec.classes_per_task + c);
            for (int i = 0; i < spec.train_per_class; ++i) {
                draw_sample(t, c, sample);
                double* dst = task.train_x.row_ptr(train_row++);
                for (int d = 0; d < spec.input_dim; ++d) dst[d] = sample[static_cast<std::size_t>(d)];
                task.train_y.push_back(c);
            }
            for (int i = 0; i < spec.test_per_class; ++i) {
                draw_sample(t, c, sample);
                double* dst = task.test_x.row_ptr(test_row++);
                for (int d = 0; d < spec.input_dim; ++d) dst[d] = sample[static_cast<std::size_t>(d)];
                task.test_y.push_back(c);
            }
        }
        stream.tasks.push_back(std::move(task));
    }
    standardize_stream(stream);
    return stream;
}

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803u;
constexpr std::uint32_t kLabelsMagic = 0x00000801u;

std::uint32_t read_u32_be(std::ifstream& in, const std::string& path) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw io_error(io_error::kind::truncated, path + ": truncated header");
    return (static_cast<std::uint32_t>(b[0]) << 24) | (static_cast<std::uint32_t>(b[1]) << 16) |
           (static_cast<std::uint32_t>(b[2]) << 8) | static_cast<std::uint32_t>(b[3]);
}

void write_u32_be(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<char*>(b), 4);
}

}  // namespace

IdxData load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw io_error(io_error::kind::open_failed, "cannot open " + images_path);
    const std::uint32_t img_magic = read_u32_be(img, images_path);
    if (img_magic != kImagesMagic)
        throw io_error(io_error::kind::bad_magic,
                       images_path + ": expected image magic 0x00000803");
    const std::uint32_t n_images = read_u32_be(img, images_path);
    const std::uint32_t rows = read_u32_be(img, images_path);
    const std::uint32_t cols = read_u32_be(img, images_path);

    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw io_error(io_error::kind::open_failed, "cannot open " + labels_path);
    const std::uint32_t lab_magic = read_u32_be(lab, labels_path);
    if (lab_magic != kLabelsMagic)
        throw io_error(io_error::kind::bad_magic,
                       labels_path + ": expected label magic 0x00000801");
    const std::uint32_t n_labels = read_u32_be(lab, labels_path);
    if (n_images != n_labels)
        throw io_error(io_error::kind::count_mismatch,
                       images_path + ": " + std::to_string(n_images) + " images vs " +
                           std::to_string(n_labels) + " labels");

    const std::size_t pixel_count = static_cast<std::size_t>(n_images) * rows * cols;
    std::vector<unsigned char> pixels(pixel_count);
    if (pixel_count > 0 && !img.read(reinterpret_cast<char*>(pixels.data()),
                                     static_cast<std::streamsize>(pixel_count)))
        throw io_error(io_error::kind::truncated, images_path + ": truncated pixel data");
    std::vector<unsigned char> labels(n_labels);
    if (n_labels > 0 && !lab.read(reinterpret_cast<char*>(labels.data()),
                                  static_cast<std::streamsize>(n_labels)))
        throw io_error(io_error::kind::truncated, labels_path + ": truncated label data");

    IdxData out;
    out.image_rows = static_cast<int>(rows);
    out.image_cols = static_cast<int>(cols);
    out.images = Matrix(static_cast<int>(n_images), static_cast<int>(rows * cols));
    for (std::size_t i = 0; i < pixel_count; ++i)
        out.images.data[i] = static_cast<double>(pixels[i]) / 255.0;
    out.labels.assign(labels.begin(), labels.end());
    return out;
}

void write_idx(const std::string& images_path, const std::string& labels_path,
               const std::vector<std::uint8_t>& pixels, int count, int rows, int cols,
               const std::vector<std::uint8_t>& labels) {
    if (pixels.size() != static_cast<std::size_t>(count) * rows * cols)
        throw contract_error("write_idx: pixel buffer size mismatch");
    if (labels.size() != static_cast<std::size_t>(count))
        throw contract_error("write_idx: label buffer size mismatch");
    std::ofstream img(images_path, std::ios::binary | std::ios::trunc);
    if (!img) throw io_error(io_error::kind::open_failed, "cannot create " + images_path);
    write_u32_be(img, kImagesMagic);
    write_u32_be(img, static_cast<std::uint32_t>(count));
    write_u32_be(img, static_cast<std::uint32_t>(rows));
    write_u32_be(img, static_cast<std::uint32_t>(cols));
    img.write(reinterpret_cast<const char*>(pixels.data()),
              static_cast<std::streamsize>(pixels.size()));
    std::ofstream lab(labels_path, std::ios::binary | std::ios::trunc);
    if (!lab) throw io_error(io_error::kind::open_failed, "cannot create " + labels_path);
    write_u32_be(lab, kLabelsMagic);
    write_u32_be(lab, static_cast<std::uint32_t>(count));
    lab.write(reinterpret_cast<const char*>(labels.data()),
              static_cast<std::streamsize>(labels.size()));
}

TaskStream split_by_classes(const IdxData& train, const IdxData& test, int classes_per_task,
                            std::uint64_t permutation_seed) {
    if (classes_per_task <= 0) throw config_error("classes_per_task must be positive");
    std::set<int> class_set(train.labels.begin(), train.labels.end());
    std::vector<int> classes(class_set.begin(), class_set.end());
    if (classes.empty()) throw config_error("split_by_classes: empty dataset");
    if (static_cast<int>(classes.size()) % classes_per_task != 0)
        throw config_error("class count " + std::to_string(classes.size()) +
                           " is not divisible by classes_per_task " +
                           std::to_string(classes_per_task));
    if (permutation_seed != 0) {
        Rng rng(permutation_seed);
        rng.shuffle(classes.data(), classes.size());
    }

    const int num_tasks = static_cast<int>(classes.size()) / classes_per_task;
    TaskStream stream;
    stream.input_dim = train.images.cols;
    stream.classes_per_task = classes_per_task;

    auto gather = [](const IdxData& src, const std::vector<int>& task_classes, Matrix& x,
                     std::vector<int>& y) {
        std::vector<int> rows;
        for (std::size_t i = 0; i < src.labels.size(); ++i) {
            for (std::size_t c = 0; c < task_classes.size(); ++c) {
                if (src.labels[i] == task_classes[c]) {
                    rows.push_back(static_cast<int>(i));
                    y.push_back(static_cast<int>(c));
                    break;
                }
            }
        }
        x = Matrix(static_cast<int>(rows.size()), src.images.cols);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const double* srcrow = src.images.row_ptr(rows[r]);
            double* dst = x.row_ptr(static_cast<int>(r));
            for (int j = 0; j < src.images.cols; ++j) dst[j] = srcrow[j];
        }
    };

    for (int t = 0; t < num_tasks; ++t) {
        TaskData task;
        task.task_id = t;
        task.class_ids.assign(classes.begin() + static_cast<std::ptrdiff_t>(t) * classes_per_task,
                              classes.begin() + static_cast<std::ptrdiff_t>(t + 1) * classes_per_task);
        gather(train, task.class_ids, task.train_x, task.train_y);
        gather(test, task.class_ids, task.test_x, task.test_y);
        if (task.train_y.empty())
            throw config_error("task " + std::to_string(t) + " has no training samples");
        stream.tasks.push_back(std::move(task));
    }
    standardize_stream(stream);
    return stream;
}

void standardize_stream(TaskStream& stream) {
    if (stream.tasks.empty()) return;
    const Matrix& ref = stream.tasks.front().train_x;
    const int dim = ref.cols;
    std::vector<double> mean(static_cast<std::size_t>(dim), 0.0);
    for (int i = 0; i < ref.rows; ++i) {
        const double* row = ref.row_ptr(i);
        for (int j = 0; j < dim; ++j) mean[static_cast<std::size_t>(j)] += row[j];
    }
    for (double& m : mean) m /= ref.rows;
    std::vector<double> scale(static_cast<std::size_t>(dim), 0.0);
    for (int i = 0; i < ref.rows; ++i) {
        const double* row = ref.row_ptr(i);
        for (int j = 0; j < dim; ++j) {
            const double d = row[j] - mean[static_cast<std::size_t>(j)];
            scale[static_cast<std::size_t>(j)] += d * d;
        }
    }
    for (double& s : scale) {
        s = std::sqrt(s / ref.rows);
        if (s < 1e-12) s = 1.0;
    }
    auto apply = [&](Matrix& x) {
        for (int i = 0; i < x.rows; ++i) {
            double* row = x.row_ptr(i);
            for (int j = 0; j < dim; ++j)
                row[j] = (row[j] - mean[static_cast<std::size_t>(j)]) / scale[static_cast<std::size_t>(j)];
        }
    };
    for (TaskData& task : stream.tasks) {
        apply(task.train_x);
        apply(task.test_x);
    }
}

}  // namespace cgp
