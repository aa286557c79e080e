#pragma once

// Little-endian binary encoding helpers for the checkpoint and archive
// formats. Values are packed into a byte buffer so a checksum can be taken
// over the exact serialized payload.

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace uabs::binio {

template <typename T>
T byteswap_if_big(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    if constexpr (std::endian::native == std::endian::big) {
        auto bytes = std::bit_cast<std::array<std::byte, sizeof(T)>>(v);
        std::reverse(bytes.begin(), bytes.end());
        return std::bit_cast<T>(bytes);
    }
    return v;
}

class Writer {
public:
    void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v) { raw(byteswap_if_big(v)); }
    void u64(std::uint64_t v) { raw(byteswap_if_big(v)); }
    void i32(std::int32_t v) { raw(byteswap_if_big(v)); }
    void f64(double v) { raw(byteswap_if_big(std::bit_cast<std::uint64_t>(v))); }

    const std::vector<char>& bytes() const { return buf_; }

private:
    template <typename T>
    void raw(T v) {
        const auto* p = reinterpret_cast<const char*>(&v);
        buf_.insert(buf_.end(), p, p + sizeof(T));
    }

    std::vector<char> buf_;
};

class Reader {
public:
    explicit Reader(std::span<const char> data) : data_(data) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
    std::uint32_t u32() { return byteswap_if_big(read_raw<std::uint32_t>()); }
    std::uint64_t u64() { return byteswap_if_big(read_raw<std::uint64_t>()); }
    std::int32_t i32() { return byteswap_if_big(read_raw<std::int32_t>()); }
    double f64() { return std::bit_cast<double>(byteswap_if_big(read_raw<std::uint64_t>())); }

    bool exhausted() const { return pos_ == data_.size(); }

private:
    std::span<const char> take(std::size_t n) {
        if (data_.size() - pos_ < n) {
            throw std::out_of_range("binio::Reader: payload ends early");
        }
        auto s = data_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

    template <typename T>
    T read_raw() {
        T v;
        auto s = take(sizeof(T));
        std::memcpy(&v, s.data(), sizeof(T));
        return v;
    }

    std::span<const char> data_;
    std::size_t pos_ = 0;
};

/// CRC-32 (IEEE 802.3 polynomial, reflected).
std::uint32_t crc32(std::span<const char> data);

}  // namespace uabs::binio
