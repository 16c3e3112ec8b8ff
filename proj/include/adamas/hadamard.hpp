#pragma once

#include <span>

#include "adamas/common.hpp"

namespace adamas {

// Sylvester-construction Walsh-Hadamard transform of order dim. When
// normalized, each butterfly level carries a 1/sqrt(2) factor so the full
// transform is orthonormal (involutive, norm preserving).
struct HadamardSpec {
    std::size_t dim;
    bool normalized = true;

    void validate() const;
};

// Out-of-place transform x -> x * H, O(d log2 d) additions/subtractions.
RealVector fwht(std::span<const double> x, const HadamardSpec& spec);

// In-place variant used by the per-token pipeline.
void fwht_inplace(std::span<double> x, const HadamardSpec& spec);

// Scalar butterfly that counts every addition/subtraction it performs;
// the count comes out to exactly d * log2(d).
RealVector fwht_counting(std::span<const double> x, const HadamardSpec& spec,
                         std::size_t& add_sub_ops);

// Explicit dim x dim matrix built by the Kronecker recursion
// H_{2n} = H_2 (x) H_n. Test oracle for the fast transform.
RealMatrix hadamard_matrix(const HadamardSpec& spec);

}  // namespace adamas
