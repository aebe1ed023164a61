#include "cgp/snapshot.hpp"

#include <string>

#include "cgp/error.hpp"
#include "cgp/io_util.hpp"

namespace cgp {

namespace {

constexpr char kMemoryMagic[8] = {'C', 'G', 'P', 'M', 'E', 'M', '0', '1'};
constexpr char kNetworkMagic[8] = {'C', 'G', 'P', 'N', 'E', 'T', '0', '1'};

constexpr std::uint32_t kSaneLimit = 1u << 24;

void write_matrix(BinWriter& w, const Matrix& m) {
    w.u32(static_cast<std::uint32_t>(m.rows));
    w.u32(static_cast<std::uint32_t>(m.cols));
    w.f64_array(m.data.data(), m.data.size());
}

Matrix read_matrix(BinReader& r) {
    const std::uint32_t rows = r.u32();
    const std::uint32_t cols = r.u32();
    if (rows > kSaneLimit || cols > kSaneLimit || (rows > 0 && cols > kSaneLimit / rows))
        throw io_error(io_error::kind::corrupt, r.path() + ": implausible matrix shape");
    Matrix m(static_cast<int>(rows), static_cast<int>(cols));
    r.f64_array(m.data.data(), m.data.size());
    return m;
}

}  // namespace

void save_memory_snapshot(const std::string& path, const BasisMemory& mem,
                          const PrototypeMemory& protos) {
    BinWriter w;
    w.magic(kMemoryMagic);
    w.u32(static_cast<std::uint32_t>(mem.layers.size()));
    for (const BasisLayer& layer : mem.layers) {
        w.u32(static_cast<std::uint32_t>(layer.dim));
        // an empty basis still records its height
        Matrix basis = layer.basis;
        if (basis.cols == 0) basis = Matrix(layer.dim, 0);
        write_matrix(w, basis);
        for (const BasisProvenance& p : layer.provenance) {
            w.i32(p.task);
            w.u32(static_cast<std::uint32_t>(p.classes.size()));
            for (int c : p.classes) w.i32(c);
        }
    }
    w.u32(static_cast<std::uint32_t>(protos.items.size()));
    for (const Prototype& p : protos.items) {
        w.i32(p.class_id);
        w.i32(p.task);
        w.u32(static_cast<std::uint32_t>(p.values.size()));
        w.f64_array(p.values.data(), p.values.size());
    }
    atomic_write_bytes(path, w.bytes());
}

MemorySnapshot load_memory_snapshot(const std::string& path) {
    BinReader r(read_binary_file(path), path);
    r.expect_magic(kMemoryMagic);
    MemorySnapshot snap;
    const std::uint32_t layers = r.u32();
    if (layers > 4096) throw io_error(io_error::kind::corrupt, path + ": implausible layer count");
    for (std::uint32_t l = 0; l < layers; ++l) {
        BasisLayer layer;
        layer.dim = static_cast<int>(r.u32());
        layer.basis = read_matrix(r);
        if (layer.basis.cols > 0 && layer.basis.rows != layer.dim)
            throw io_error(io_error::kind::corrupt, path + ": basis height disagrees with dim");
        if (layer.basis.cols > layer.dim)
            throw io_error(io_error::kind::corrupt, path + ": more bases than dimensions");
        const int ncols = layer.basis.cols;
        if (ncols == 0) layer.basis = Matrix();
        for (int c = 0; c < ncols; ++c) {
            BasisProvenance p;
            p.task = r.i32();
            const std::uint32_t nc = r.u32();
            if (nc > kSaneLimit) throw io_error(io_error::kind::corrupt, path + ": provenance too large");
            for (std::uint32_t i = 0; i < nc; ++i) p.classes.push_back(r.i32());
            layer.provenance.push_back(std::move(p));
        }
        snap.memory.layers.push_back(std::move(layer));
    }
    const std::uint32_t protos = r.u32();
    if (protos > kSaneLimit) throw io_error(io_error::kind::corrupt, path + ": implausible prototype count");
    for (std::uint32_t i = 0; i < protos; ++i) {
        Prototype p;
        p.class_id = r.i32();
        p.task = r.i32();
        const std::uint32_t dim = r.u32();
        if (dim > kSaneLimit) throw io_error(io_error::kind::corrupt, path + ": implausible prototype size");
        p.values.resize(dim);
        r.f64_array(p.values.data(), p.values.size());
        snap.prototypes.items.push_back(std::move(p));
    }
    if (!r.at_end()) throw io_error(io_error::kind::corrupt, path + ": trailing bytes");
    return snap;
}

void save_network_snapshot(const std::string& path, const Network& net) {
    BinWriter w;
    w.magic(kNetworkMagic);
    w.u32(static_cast<std::uint32_t>(net.config.layer_sizes.size()));
    for (int d : net.config.layer_sizes) w.i32(d);
    w.i32(net.config.num_tasks);
    w.i32(net.config.classes_per_task);
    w.u64(net.config.seed);
    for (const Matrix& m : net.weights) write_matrix(w, m);
    for (const Matrix& m : net.heads) write_matrix(w, m);
    for (bool f : net.frozen_heads) w.u32(f ? 1 : 0);
    atomic_write_bytes(path, w.bytes());
}

Network load_network_snapshot(const std::string& path) {
    BinReader r(read_binary_file(path), path);
    r.expect_magic(kNetworkMagic);
    Network net;
    const std::uint32_t nsizes = r.u32();
    if (nsizes < 2 || nsizes > 4096)
        throw io_error(io_error::kind::corrupt, path + ": implausible layer count");
    for (std::uint32_t i = 0; i < nsizes; ++i) net.config.layer_sizes.push_back(r.i32());
    net.config.num_tasks = r.i32();
    net.config.classes_per_task = r.i32();
    net.config.seed = r.u64();
    try {
        net.config.validate();
    } catch (const error&) {
        throw io_error(io_error::kind::corrupt, path + ": inconsistent network shape");
    }
    for (int l = 0; l < net.config.num_layers(); ++l) {
        Matrix m = read_matrix(r);
        if (m.rows != net.config.layer_sizes[static_cast<std::size_t>(l) + 1] ||
            m.cols != net.config.layer_sizes[static_cast<std::size_t>(l)] + 1)
            throw io_error(io_error::kind::corrupt, path + ": weight shape mismatch");
        net.weights.push_back(std::move(m));
    }
    for (int t = 0; t < net.config.num_tasks; ++t) {
        Matrix m = read_matrix(r);
        if (m.rows != net.config.classes_per_task || m.cols != net.config.embedding_dim())
            throw io_error(io_error::kind::corrupt, path + ": head shape mismatch");
        net.heads.push_back(std::move(m));
    }
    for (int t = 0; t < net.config.num_tasks; ++t) net.frozen_heads.push_back(r.u32() != 0);
    if (!r.at_end()) throw io_error(io_error::kind::corrupt, path + ": trailing bytes");
    return net;
}

}  // namespace cgp
