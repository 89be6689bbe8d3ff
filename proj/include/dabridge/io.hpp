#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace dabridge {

// Raised on malformed binary files; carries the byte offset of the problem.
struct FormatError : std::runtime_error {
    FormatError(const std::string& msg, std::size_t offset)
        : std::runtime_error(msg + " (at byte offset " + std::to_string(offset) + ")"),
          byte_offset(offset) {}
    std::size_t byte_offset;
};

// Little-endian, append-only byte buffer used by the DABT/DABR writers.
class ByteWriter {
public:
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void f64(double v);
    void magic(const char tag[4]);
    void f64_array(const double* data, std::size_t n);

    const std::vector<std::uint8_t>& bytes() const { return buf_; }

private:
    std::vector<std::uint8_t> buf_;
};

// Little-endian cursor over an in-memory file image. Reads past the end
// throw FormatError naming the offending offset.
class ByteReader {
public:
    explicit ByteReader(std::vector<std::uint8_t> bytes) : buf_(std::move(bytes)) {}

    std::uint32_t u32();
    std::uint64_t u64();
    double f64();
    void expect_magic(const char tag[4], const char* what);
    void f64_array(double* out, std::size_t n);

    std::size_t offset() const { return pos_; }
    std::size_t remaining() const { return buf_.size() - pos_; }
    void expect_end(const char* what);

private:
    void need(std::size_t n, const char* what);

    std::vector<std::uint8_t> buf_;
    std::size_t pos_ = 0;
};

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

}  // namespace dabridge
