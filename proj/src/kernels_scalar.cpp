#include "adamas/kernels.hpp"

#include <bit>
#include <cstring>

#include "kernels_impl.hpp"

namespace adamas::kernels {
namespace detail {

void fwht_scalar(double* x, std::size_t n, bool normalized) {
    if (normalized) {
        for (std::size_t h = 1; h < n; h <<= 1) {
            for (std::size_t i = 0; i < n; i += 2 * h) {
                for (std::size_t j = i; j < i + h; ++j) {
                    const double a = x[j];
                    const double b = x[j + h];
                    x[j] = (a + b) * k_inv_sqrt2;
                    x[j + h] = (a - b) * k_inv_sqrt2;
                }
            }
        }
    } else {
        for (std::size_t h = 1; h < n; h <<= 1) {
            for (std::size_t i = 0; i < n; i += 2 * h) {
                for (std::size_t j = i; j < i + h; ++j) {
                    const double a = x[j];
                    const double b = x[j + h];
                    x[j] = a + b;
                    x[j + h] = a - b;
                }
            }
        }
    }
}

namespace {

// SWAR absolute difference over four 4-bit fields (values <= 7 per field).
// The guard bit 8+x-y never borrows across fields, its bit 3 tells x >= y.
inline std::uint32_t absdiff_fields4(std::uint32_t x, std::uint32_t y) {
    const std::uint32_t t = (x | 0x8888u) - y;
    const std::uint32_t sel = ((t & 0x8888u) >> 3) * 0xFu;  // 0xF where x >= y
    const std::uint32_t mx = (x & sel) | (y & ~sel);
    const std::uint32_t mn = (y & sel) | (x & ~sel);
    return mx - mn;  // per-field max - min, no inter-field borrow
}

inline std::uint32_t hsum_fields4(std::uint32_t d) {
    d = (d & 0x0F0Fu) + ((d >> 4) & 0x0F0Fu);
    return (d + (d >> 8)) & 0xFFu;
}

inline std::uint32_t sqsum_fields4(std::uint32_t d) {
    std::uint32_t acc = 0;
    for (int j = 0; j < 16; j += 4) {
        const std::uint32_t v = (d >> j) & 0xFu;
        acc += v * v;
    }
    return acc;
}

}  // namespace

std::uint32_t l1_2bit_word(std::uint16_t q, std::uint16_t k) {
    // Split the eight 2-bit lanes into even/odd 4-bit fields for headroom.
    const std::uint32_t de = absdiff_fields4(q & 0x3333u, k & 0x3333u);
    const std::uint32_t dw = absdiff_fields4((q >> 2) & 0x3333u, (k >> 2) & 0x3333u);
    return hsum_fields4(de + dw);  // fields <= 6, still carry-free
}

std::uint32_t l2_2bit_word(std::uint16_t q, std::uint16_t k) {
    const std::uint32_t de = absdiff_fields4(q & 0x3333u, k & 0x3333u);
    const std::uint32_t dw = absdiff_fields4((q >> 2) & 0x3333u, (k >> 2) & 0x3333u);
    return sqsum_fields4(de) + sqsum_fields4(dw);
}

std::uint32_t l1_2bit_scalar(const std::uint16_t* q, const std::uint16_t* k, std::size_t nwords) {
    std::uint32_t acc = 0;
    for (std::size_t i = 0; i < nwords; ++i) acc += l1_2bit_word(q[i], k[i]);
    return acc;
}

std::uint32_t l2_2bit_scalar(const std::uint16_t* q, const std::uint16_t* k, std::size_t nwords) {
    std::uint32_t acc = 0;
    for (std::size_t i = 0; i < nwords; ++i) acc += l2_2bit_word(q[i], k[i]);
    return acc;
}

std::uint32_t l1_1bit_words(const std::uint16_t* q, const std::uint16_t* k, std::size_t nwords) {
    std::uint32_t acc = 0;
    std::size_t i = 0;
    for (; i + 4 <= nwords; i += 4) {
        std::uint64_t a, b;
        std::memcpy(&a, q + i, sizeof(a));
        std::memcpy(&b, k + i, sizeof(b));
        acc += static_cast<std::uint32_t>(std::popcount(a ^ b));
    }
    for (; i < nwords; ++i) {
        acc += static_cast<std::uint32_t>(std::popcount(static_cast<std::uint32_t>(q[i] ^ k[i])));
    }
    return acc;
}

std::uint32_t l1_bytes_scalar(const std::uint8_t* q, const std::uint8_t* k, std::size_t n) {
    std::uint32_t acc = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const int d = static_cast<int>(q[i]) - static_cast<int>(k[i]);
        acc += static_cast<std::uint32_t>(d < 0 ? -d : d);
    }
    return acc;
}

std::uint32_t l2_bytes_scalar(const std::uint8_t* q, const std::uint8_t* k, std::size_t n) {
    std::uint32_t acc = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const int d = static_cast<int>(q[i]) - static_cast<int>(k[i]);
        acc += static_cast<std::uint32_t>(d * d);
    }
    return acc;
}

}  // namespace detail

const Kernels& scalar_kernels() {
    static const Kernels table = {
        "scalar",
        &detail::fwht_scalar,
        &detail::l1_2bit_scalar,
        &detail::l2_2bit_scalar,
        &detail::l1_1bit_words,
        &detail::l1_bytes_scalar,
        &detail::l2_bytes_scalar,
    };
    return table;
}

const Kernels& active_kernels() {
    return kernels_for(active_simd_level());
}

const Kernels& kernels_for(SimdLevel level) {
    switch (level) {
        case SimdLevel::avx2: return avx2_kernels();
        case SimdLevel::scalar: break;
    }
    return scalar_kernels();
}

}  // namespace adamas::kernels
