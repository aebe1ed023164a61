#include "cgp/io_util.hpp"

#include <cstdio>
#include <cstring>

#include "cgp/error.hpp"

namespace cgp {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_percent(double fraction) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
    return buf;
}

namespace {

void rename_into_place(const std::string& tmp, const std::string& path) {
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw io_error(io_error::kind::open_failed, "cannot move " + tmp + " to " + path);
    }
}

}  // namespace

void atomic_write_text(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw io_error(io_error::kind::open_failed, "cannot create " + tmp);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw io_error(io_error::kind::open_failed, "short write to " + tmp);
    }
    rename_into_place(tmp, path);
}

void atomic_write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw io_error(io_error::kind::open_failed, "cannot create " + tmp);
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        if (!out) throw io_error(io_error::kind::open_failed, "short write to " + tmp);
    }
    rename_into_place(tmp, path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error(io_error::kind::open_failed, "cannot open " + path);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return content;
}

void BinWriter::magic(const char tag[8]) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(tag[i]));
}

void BinWriter::u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void BinWriter::u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void BinWriter::i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }

void BinWriter::f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u64(bits);
}

void BinWriter::f64_array(const double* data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) f64(data[i]);
}

BinReader::BinReader(std::vector<std::uint8_t> bytes, std::string path)
    : bytes_(std::move(bytes)), path_(std::move(path)) {}

void BinReader::need(std::size_t n) {
    if (pos_ + n > bytes_.size())
        throw io_error(io_error::kind::truncated, path_ + ": truncated snapshot");
}

void BinReader::expect_magic(const char tag[8]) {
    need(8);
    for (int i = 0; i < 8; ++i)
        if (bytes_[pos_ + static_cast<std::size_t>(i)] != static_cast<std::uint8_t>(tag[i]))
            throw io_error(io_error::kind::bad_magic, path_ + ": unrecognized snapshot format");
    pos_ += 8;
}

std::uint32_t BinReader::u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + static_cast<std::size_t>(i)]) << (8 * i);
    pos_ += 4;
    return v;
}

std::uint64_t BinReader::u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + static_cast<std::size_t>(i)]) << (8 * i);
    pos_ += 8;
    return v;
}

std::int32_t BinReader::i32() { return static_cast<std::int32_t>(u32()); }

double BinReader::f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

void BinReader::f64_array(double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f64();
}

std::vector<std::uint8_t> read_binary_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error(io_error::kind::open_failed, "cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

}  // namespace cgp
