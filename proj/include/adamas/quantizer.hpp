#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "adamas/common.hpp"

namespace adamas {

// Ascending bucket boundaries; 2^bits - 1 of them for a bits-wide code.
struct BucketThresholds {
    int bits = 2;                 // 1, 2, or 3
    std::vector<double> values;   // strictly increasing

    void validate() const;
};

// Scale-adaptive symmetric thresholds: sigma = RMS(x) times the standard
// normal quantiles at i/2^bits, giving equiprobable buckets for the
// near-Gaussian values the Hadamard transform produces. bits=1 reduces to a
// sign split at 0. Rejects empty, non-finite, and all-zero inputs.
BucketThresholds compute_thresholds(std::span<const double> x, int bits);

// Fixed global thresholds for reproducibility experiments; validates shape
// and ordering.
BucketThresholds fixed_thresholds(int bits, std::span<const double> values);

// Per-element bucket levels, each in [0, 2^bits).
struct CodeVector {
    std::vector<std::uint8_t> codes;
    int bits = 2;

    std::size_t len() const { return codes.size(); }
};

// code[i] = number of thresholds strictly below x[i] (ties go to the lower
// bucket).
CodeVector bucketize(std::span<const double> x, const BucketThresholds& t);

// Codes packed little-endian into 16-bit words: element i of a word occupies
// bits [bits*i, bits*(i+1)). Only 1- and 2-bit codes pack; 3-bit codes stay
// one byte per element (ablation-only, no packing story for them).
struct PackedCodes {
    std::vector<std::uint16_t> words;
    std::size_t len = 0;  // code count including padding; words.size() * (16/bits)
    int bits = 2;

    std::size_t codes_per_word() const { return 16u / static_cast<unsigned>(bits); }
};

// When pad is true, lengths are rounded up to a full word with code 0 (both
// query and key sides pad identically, so padding adds 0 to any distance).
PackedCodes pack(const CodeVector& c, bool pad = true);

// Exact inverse of pack (padded length). Test oracle; the distance kernels
// never unpack.
CodeVector unpack(const PackedCodes& p);

// Bytes of one packed code vector of logical length d at the given width.
std::size_t packed_bytes(std::size_t d, int bits);

}  // namespace adamas
