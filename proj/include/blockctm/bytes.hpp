#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "blockctm/error.hpp"

namespace blockctm {

// Little-endian binary encoding helpers for the on-disk formats.

class ByteWriter {
public:
    void put_u8(std::uint8_t v) { out_.push_back(v); }
    void put_u32(std::uint32_t v) { put_le(v, 4); }
    void put_u64(std::uint64_t v) { put_le(v, 8); }
    void put_f64(double v) { put_le(std::bit_cast<std::uint64_t>(v), 8); }
    void put_bytes(std::string_view s) { out_.insert(out_.end(), s.begin(), s.end()); }
    void put_string(std::string_view s) {
        put_u32(static_cast<std::uint32_t>(s.size()));
        put_bytes(s);
    }

    [[nodiscard]] const std::vector<std::uint8_t>& bytes() const noexcept { return out_; }
    [[nodiscard]] std::vector<std::uint8_t> take() noexcept { return std::move(out_); }

private:
    void put_le(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    std::vector<std::uint8_t> out_;
};

/// Bounds-checked reader; every overrun throws FormatError mentioning
/// `context`.
class ByteReader {
public:
    ByteReader(std::span<const std::uint8_t> bytes, std::string context)
        : bytes_(bytes), context_(std::move(context)) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
    std::uint64_t u64() { return le(8); }
    double f64() { return std::bit_cast<double>(le(8)); }
    std::string raw(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    std::string string() { return raw(u32()); }

    [[nodiscard]] std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
    [[nodiscard]] bool at_end() const noexcept { return pos_ == bytes_.size(); }
    void need(std::size_t n) const {
        if (remaining() < n) throw FormatError(context_ + ": truncated stream");
    }

private:
    std::uint64_t le(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += static_cast<std::size_t>(n);
        return v;
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
    std::string context_;
};

}  // namespace blockctm
