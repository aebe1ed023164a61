#ifndef CGP_IO_UTIL_HPP
#define CGP_IO_UTIL_HPP

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace cgp {

// Shortest representation that round-trips a double exactly.
std::string format_double(double v);

// Fixed two-decimal percent formatting for report rows.
std::string format_percent(double fraction);

// Write-temp-then-rename so partially written artifacts are never observed.
void atomic_write_text(const std::string& path, const std::string& content);
void atomic_write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes);

std::string read_text_file(const std::string& path);

// Little-endian binary encoding helpers for the snapshot formats.
class BinWriter {
public:
    void magic(const char tag[8]);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void i32(std::int32_t v);
    void f64(double v);
    void f64_array(const double* data, std::size_t n);
    const std::vector<std::uint8_t>& bytes() const { return bytes_; }

private:
    std::vector<std::uint8_t> bytes_;
};

class BinReader {
public:
    BinReader(std::vector<std::uint8_t> bytes, std::string path);
    void expect_magic(const char tag[8]);
    std::uint32_t u32();
    std::uint64_t u64();
    std::int32_t i32();
    double f64();
    void f64_array(double* out, std::size_t n);
    bool at_end() const { return pos_ == bytes_.size(); }
    const std::string& path() const { return path_; }

private:
    void need(std::size_t n);
    std::vector<std::uint8_t> bytes_;
    std::size_t pos_ = 0;
    std::string path_;
};

std::vector<std::uint8_t> read_binary_file(const std::string& path);

}  // namespace cgp

#endif
