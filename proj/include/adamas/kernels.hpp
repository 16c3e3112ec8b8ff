#pragma once

#include <cstddef>
#include <cstdint>

#include "adamas/simd.hpp"

namespace adamas::kernels {

// Inner-loop kernel table. Each entry has a scalar reference implementation
// and (where it pays off) an AVX2 variant compiled in its own translation
// unit. Variants must produce results identical to the scalar reference:
// the floating-point kernels perform the same operations in the same order,
// the integer kernels are exact by construction. tests/test_kernels.cpp
// checks this equivalence pairwise.
struct Kernels {
    const char* name;

    // In-place Walsh-Hadamard butterfly over n (power of two) doubles.
    // When normalized, every butterfly output is scaled by 1/sqrt(2).
    void (*fwht)(double* x, std::size_t n, bool normalized);

    // Distances over 2-bit codes packed 8 per 16-bit word.
    std::uint32_t (*l1_2bit)(const std::uint16_t* q, const std::uint16_t* k, std::size_t nwords);
    std::uint32_t (*l2_2bit)(const std::uint16_t* q, const std::uint16_t* k, std::size_t nwords);

    // Distance over 1-bit codes packed 16 per word (L1 == L2 at one bit).
    std::uint32_t (*l1_1bit)(const std::uint16_t* q, const std::uint16_t* k, std::size_t nwords);

    // Distances over one-byte-per-element codes (the 3-bit ablation path).
    std::uint32_t (*l1_bytes)(const std::uint8_t* q, const std::uint8_t* k, std::size_t n);
    std::uint32_t (*l2_bytes)(const std::uint8_t* q, const std::uint8_t* k, std::size_t n);
};

const Kernels& scalar_kernels();
const Kernels& avx2_kernels();

// Table for the currently active SIMD level (see adamas/simd.hpp).
const Kernels& active_kernels();
const Kernels& kernels_for(SimdLevel level);

}  // namespace adamas::kernels
