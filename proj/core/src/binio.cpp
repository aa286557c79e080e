#include "binio.hpp"

#include <array>

namespace uabs::binio {

namespace {

std::array<std::uint32_t, 256> make_crc_table() {
    std::array<std::uint32_t, 256> table{};
    for (std::uint32_t i = 0; i < 256; ++i) {
        std::uint32_t c = i;
        for (int k = 0; k < 8; ++k) {
            c = (c & 1u) ? 0xedb88320u ^ (c >> 1) : c >> 1;
        }
        table[i] = c;
    }
    return table;
}

}  // namespace

std::uint32_t crc32(std::span<const char> data) {
    static const auto table = make_crc_table();
    std::uint32_t c = 0xffffffffu;
    for (const char byte : data) {
        c = table[(c ^ static_cast<unsigned char>(byte)) & 0xffu] ^ (c >> 8);
    }
    return c ^ 0xffffffffu;
}

}  // namespace uabs::binio
