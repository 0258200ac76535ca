#include "clinigym/md5.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>

namespace clinigym {

namespace {

constexpr std::array<std::uint32_t, 64> kSine = {
    0xd76aa478, 0xe8c7b756, 0x242070db, 0xc1bdceee, 0xf57c0faf, 0x4787c62a,
    0xa8304613, 0xfd469501, 0x698098d8, 0x8b44f7af, 0xffff5bb1, 0x895cd7be,
    0x6b901122, 0xfd987193, 0xa679438e, 0x49b40821, 0xf61e2562, 0xc040b340,
    0x265e5a51, 0xe9b6c7aa, 0xd62f105d, 0x02441453, 0xd8a1e681, 0xe7d3fbc8,
    0x21e1cde6, 0xc33707d6, 0xf4d50d87, 0x455a14ed, 0xa9e3e905, 0xfcefa3f8,
    0x676f02d9, 0x8d2a4c8a, 0xfffa3942, 0x8771f681, 0x6d9d6122, 0xfde5380c,
    0xa4beea44, 0x4bdecfa9, 0xf6bb4b60, 0xbebfbc70, 0x289b7ec6, 0xeaa127fa,
    0xd4ef3085, 0x04881d05, 0xd9d4d039, 0xe6db99e5, 0x1fa27cf8, 0xc4ac5665,
    0xf4292244, 0x432aff97, 0xab9423a7, 0xfc93a039, 0x655b59c3, 0x8f0ccc92,
    0xffeff47d, 0x85845dd1, 0x6fa87e4f, 0xfe2ce6e0, 0xa3014314, 0x4e0811a1,
    0xf7537e82, 0xbd3af235, 0x2ad7d2bb, 0xeb86d391};

constexpr std::array<int, 64> kShift = {
    7, 12, 17, 22, 7, 12, 17, 22, 7, 12, 17, 22, 7, 12, 17, 22,
    5, 9,  14, 20, 5, 9,  14, 20, 5, 9,  14, 20, 5, 9,  14, 20,
    4, 11, 16, 23, 4, 11, 16, 23, 4, 11, 16, 23, 4, 11, 16, 23,
    6, 10, 15, 21, 6, 10, 15, 21, 6, 10, 15, 21, 6, 10, 15, 21};

void process_block(const unsigned char* block, std::uint32_t* h) {
    std::uint32_t m[16];
    for (int i = 0; i < 16; ++i) {
        std::memcpy(&m[i], block + 4 * i, 4);  // little-endian host assumed for memcpy load
        if constexpr (std::endian::native == std::endian::big) {
            m[i] = __builtin_bswap32(m[i]);
        }
    }
    std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3];
    for (int i = 0; i < 64; ++i) {
        std::uint32_t f;
        int g;
        if (i < 16) {
            f = (b & c) | (~b & d);
            g = i;
        } else if (i < 32) {
            f = (d & b) | (~d & c);
            g = (5 * i + 1) % 16;
        } else if (i < 48) {
            f = b ^ c ^ d;
            g = (3 * i + 5) % 16;
        } else {
            f = c ^ (b | ~d);
            g = (7 * i) % 16;
        }
        std::uint32_t tmp = d;
        d = c;
        c = b;
        std::uint32_t x = a + f + kSine[i] + m[g];
        b = b + std::rotl(x, kShift[i]);
        a = tmp;
    }
    h[0] += a;
    h[1] += b;
    h[2] += c;
    h[3] += d;
}

}  // namespace

std::string md5_hex(std::string_view bytes) {
    std::uint32_t h[4] = {0x67452301, 0xefcdab89, 0x98badcfe, 0x10325476};

    const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
    std::size_t n = bytes.size();
    std::size_t full = n / 64;
    for (std::size_t i = 0; i < full; ++i) process_block(data + 64 * i, h);

    unsigned char tail[128] = {0};
    std::size_t rem = n - full * 64;
    std::memcpy(tail, data + full * 64, rem);
    tail[rem] = 0x80;
    std::size_t tail_len = (rem + 9 <= 64) ? 64 : 128;
    std::uint64_t bit_len = static_cast<std::uint64_t>(n) * 8;
    for (int i = 0; i < 8; ++i)
        tail[tail_len - 8 + i] = static_cast<unsigned char>((bit_len >> (8 * i)) & 0xff);
    process_block(tail, h);
    if (tail_len == 128) process_block(tail + 64, h);

    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(32);
    for (std::uint32_t word : h) {
        for (int byte = 0; byte < 4; ++byte) {
            unsigned char v = static_cast<unsigned char>((word >> (8 * byte)) & 0xff);
            out.push_back(hex[v >> 4]);
            out.push_back(hex[v & 0xf]);
        }
    }
    return out;
}

}  // namespace clinigym
