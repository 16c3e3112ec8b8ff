// AVX2 kernel variants. This file is compiled with -mavx2; callers reach it
// only through the dispatch table when the CPU reports AVX2.

#include "adamas/kernels.hpp"

#include <immintrin.h>

#include "kernels_impl.hpp"

namespace adamas::kernels {
namespace {

using namespace detail;

inline std::uint64_t hsum_epi64(__m256i v) {
    const __m128i lo = _mm256_castsi256_si128(v);
    const __m128i hi = _mm256_extracti128_si256(v, 1);
    const __m128i s = _mm_add_epi64(lo, hi);
    return static_cast<std::uint64_t>(_mm_extract_epi64(s, 0)) +
           static_cast<std::uint64_t>(_mm_extract_epi64(s, 1));
}

// Butterfly levels keep the exact per-element operation order of the scalar
// reference, so results are bitwise identical.
void fwht_avx2(double* x, std::size_t n, bool normalized) {
    if (n < 8) {
        fwht_scalar(x, n, normalized);
        return;
    }
    const __m256d vscale = _mm256_set1_pd(k_inv_sqrt2);

    // h == 1: pairs are adjacent lanes.
    for (std::size_t i = 0; i < n; i += 4) {
        const __m256d v = _mm256_loadu_pd(x + i);
        const __m256d sw = _mm256_permute_pd(v, 0b0101);
        const __m256d sum = _mm256_add_pd(v, sw);
        const __m256d dif = _mm256_sub_pd(sw, v);  // lanes 1,3 hold a - b
        __m256d r = _mm256_blend_pd(sum, dif, 0b1010);
        if (normalized) r = _mm256_mul_pd(r, vscale);
        _mm256_storeu_pd(x + i, r);
    }

    // h == 2: pairs straddle the 128-bit halves.
    for (std::size_t i = 0; i < n; i += 4) {
        const __m256d v = _mm256_loadu_pd(x + i);
        const __m256d sw = _mm256_permute2f128_pd(v, v, 0x01);
        const __m256d sum = _mm256_add_pd(v, sw);
        const __m256d dif = _mm256_sub_pd(sw, v);  // lanes 2,3 hold a - b
        __m256d r = _mm256_blend_pd(sum, dif, 0b1100);
        if (normalized) r = _mm256_mul_pd(r, vscale);
        _mm256_storeu_pd(x + i, r);
    }

    for (std::size_t h = 4; h < n; h <<= 1) {
        for (std::size_t i = 0; i < n; i += 2 * h) {
            for (std::size_t j = i; j < i + h; j += 4) {
                const __m256d a = _mm256_loadu_pd(x + j);
                const __m256d b = _mm256_loadu_pd(x + j + h);
                __m256d s = _mm256_add_pd(a, b);
                __m256d d = _mm256_sub_pd(a, b);
                if (normalized) {
                    s = _mm256_mul_pd(s, vscale);
                    d = _mm256_mul_pd(d, vscale);
                }
                _mm256_storeu_pd(x + j, s);
                _mm256_storeu_pd(x + j + h, d);
            }
        }
    }
}

// The byte stream of packed words holds four 2-bit lanes per byte; shifting
// the 16-bit lanes by 0/2/4/6 and masking 0x03 per byte visits each lane
// exactly once.
std::uint32_t l1_2bit_avx2(const std::uint16_t* q, const std::uint16_t* k, std::size_t nwords) {
    const __m256i low2 = _mm256_set1_epi8(0x03);
    const __m256i zero = _mm256_setzero_si256();
    __m256i acc = zero;
    std::size_t i = 0;
    for (; i + 16 <= nwords; i += 16) {
        const __m256i a = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(q + i));
        const __m256i b = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(k + i));
        for (int shift = 0; shift < 8; shift += 2) {
            const __m256i ax = _mm256_and_si256(_mm256_srli_epi16(a, shift), low2);
            const __m256i bx = _mm256_and_si256(_mm256_srli_epi16(b, shift), low2);
            const __m256i d =
                _mm256_sub_epi8(_mm256_max_epu8(ax, bx), _mm256_min_epu8(ax, bx));
            acc = _mm256_add_epi64(acc, _mm256_sad_epu8(d, zero));
        }
    }
    std::uint32_t total = static_cast<std::uint32_t>(hsum_epi64(acc));
    for (; i < nwords; ++i) total += l1_2bit_word(q[i], k[i]);
    return total;
}

std::uint32_t l2_2bit_avx2(const std::uint16_t* q, const std::uint16_t* k, std::size_t nwords) {
    const __m256i low2 = _mm256_set1_epi8(0x03);
    const __m256i zero = _mm256_setzero_si256();
    // Lane differences are <= 3, so a 16-entry shuffle table squares them.
    const __m256i sq = _mm256_setr_epi8(0, 1, 4, 9, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0,
                                        0, 1, 4, 9, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0);
    __m256i acc = zero;
    std::size_t i = 0;
    for (; i + 16 <= nwords; i += 16) {
        const __m256i a = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(q + i));
        const __m256i b = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(k + i));
        for (int shift = 0; shift < 8; shift += 2) {
            const __m256i ax = _mm256_and_si256(_mm256_srli_epi16(a, shift), low2);
            const __m256i bx = _mm256_and_si256(_mm256_srli_epi16(b, shift), low2);
            const __m256i d =
                _mm256_sub_epi8(_mm256_max_epu8(ax, bx), _mm256_min_epu8(ax, bx));
            acc = _mm256_add_epi64(acc, _mm256_sad_epu8(_mm256_shuffle_epi8(sq, d), zero));
        }
    }
    std::uint32_t total = static_cast<std::uint32_t>(hsum_epi64(acc));
    for (; i < nwords; ++i) total += l2_2bit_word(q[i], k[i]);
    return total;
}

std::uint32_t l1_bytes_avx2(const std::uint8_t* q, const std::uint8_t* k, std::size_t n) {
    const __m256i zero = _mm256_setzero_si256();
    __m256i acc = zero;
    std::size_t i = 0;
    for (; i + 32 <= n; i += 32) {
        const __m256i a = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(q + i));
        const __m256i b = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(k + i));
        const __m256i d = _mm256_sub_epi8(_mm256_max_epu8(a, b), _mm256_min_epu8(a, b));
        acc = _mm256_add_epi64(acc, _mm256_sad_epu8(d, zero));
    }
    std::uint32_t total = static_cast<std::uint32_t>(hsum_epi64(acc));
    if (i < n) total += l1_bytes_scalar(q + i, k + i, n - i);
    return total;
}

// Code values stay below 8, so |d| <= 7 and the 16-entry square table holds.
std::uint32_t l2_bytes_avx2(const std::uint8_t* q, const std::uint8_t* k, std::size_t n) {
    const __m256i zero = _mm256_setzero_si256();
    const __m256i sq = _mm256_setr_epi8(0, 1, 4, 9, 16, 25, 36, 49, 0, 0, 0, 0, 0, 0, 0, 0,
                                        0, 1, 4, 9, 16, 25, 36, 49, 0, 0, 0, 0, 0, 0, 0, 0);
    __m256i acc = zero;
    std::size_t i = 0;
    for (; i + 32 <= n; i += 32) {
        const __m256i a = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(q + i));
        const __m256i b = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(k + i));
        const __m256i d = _mm256_sub_epi8(_mm256_max_epu8(a, b), _mm256_min_epu8(a, b));
        acc = _mm256_add_epi64(acc, _mm256_sad_epu8(_mm256_shuffle_epi8(sq, d), zero));
    }
    std::uint32_t total = static_cast<std::uint32_t>(hsum_epi64(acc));
    if (i < n) total += l2_bytes_scalar(q + i, k + i, n - i);
    return total;
}

}  // namespace

const Kernels& avx2_kernels() {
    static const Kernels table = {
        "avx2",
        &fwht_avx2,
        &l1_2bit_avx2,
        &l2_2bit_avx2,
        &detail::l1_1bit_words,  // u64 popcount is already optimal at 1 bit
        &l1_bytes_avx2,
        &l2_bytes_avx2,
    };
    return table;
}

}  // namespace adamas::kernels
