#pragma once

#include <optional>
#include <span>

#include "adamas/estimator.hpp"
#include "adamas/kv_cache.hpp"

namespace adamas {

struct AttentionOutput {
    RealVector out;
    // Post-softmax weights over the attended tokens, materialized on request
    // for debugging; nonnegative and summing to 1.
    std::optional<RealVector> weights;
};

// Dense softmax(q K^T / sqrt(d)) V with max-subtracted logits. The sqrt(d)
// uses the head dimension of the inputs as given; any transform applied for
// selection never touches this arithmetic.
AttentionOutput full_attention(std::span<const double> q, const RealMatrix& keys,
                               const RealMatrix& values, bool want_weights = false);

// Attention restricted to the selected cache rows: gather then dense, with
// softmax renormalized over the subset only.
AttentionOutput sparse_attention(std::span<const double> q, const KvCache& cache,
                                 const SelectionResult& sel, bool want_weights = false);

// Relative L2 deviation ||approx - exact|| / max(||exact||, 1e-30).
double output_error(const AttentionOutput& approx, const AttentionOutput& exact);

}  // namespace adamas
