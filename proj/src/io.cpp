#include "dabridge/io.hpp"

#include <cstring>
#include <fstream>

namespace dabridge {

void ByteWriter::u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::magic(const char tag[4]) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(tag[i]));
}

void ByteWriter::f64_array(const double* data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) f64(data[i]);
}

void ByteReader::need(std::size_t n, const char* what) {
    if (pos_ + n > buf_.size()) {
        throw FormatError(std::string("truncated file: expected ") + std::to_string(n) +
                              " more byte(s) for " + what,
                          pos_);
    }
}

std::uint32_t ByteReader::u32() {
    need(4, "u32");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
}

std::uint64_t ByteReader::u64() {
    need(8, "u64");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
}

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

void ByteReader::expect_magic(const char tag[4], const char* what) {
    need(4, "magic");
    if (std::memcmp(buf_.data() + pos_, tag, 4) != 0) {
        throw FormatError(std::string("bad magic, not a ") + what + " file", pos_);
    }
    pos_ += 4;
}

void ByteReader::f64_array(double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f64();
}

void ByteReader::expect_end(const char* what) {
    if (pos_ != buf_.size()) {
        throw FormatError(std::string("trailing bytes after ") + what, pos_);
    }
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    const auto size = in.tellg();
    in.seekg(0);
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
    in.read(reinterpret_cast<char*>(bytes.data()), size);
    if (!in) throw std::runtime_error("read failed: " + path.string());
    return bytes;
}

}  // namespace dabridge
