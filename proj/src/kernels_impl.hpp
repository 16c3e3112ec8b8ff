#pragma once

// Shared between the scalar and AVX2 kernel translation units. Not installed.

#include <cstddef>
#include <cstdint>

namespace adamas::kernels::detail {

inline constexpr double k_inv_sqrt2 = 0.70710678118654752440;

// |a - b| summed over the eight 2-bit lanes of one packed word pair.
std::uint32_t l1_2bit_word(std::uint16_t q, std::uint16_t k);
std::uint32_t l2_2bit_word(std::uint16_t q, std::uint16_t k);

void fwht_scalar(double* x, std::size_t n, bool normalized);
std::uint32_t l1_2bit_scalar(const std::uint16_t* q, const std::uint16_t* k, std::size_t nwords);
std::uint32_t l2_2bit_scalar(const std::uint16_t* q, const std::uint16_t* k, std::size_t nwords);
std::uint32_t l1_1bit_words(const std::uint16_t* q, const std::uint16_t* k, std::size_t nwords);
std::uint32_t l1_bytes_scalar(const std::uint8_t* q, const std::uint8_t* k, std::size_t n);
std::uint32_t l2_bytes_scalar(const std::uint8_t* q, const std::uint8_t* k, std::size_t n);

}  // namespace adamas::kernels::detail
