#pragma once

#include <cstdint>
#include <vector>

#include "adamas/kv_cache.hpp"
#include "adamas/quantizer.hpp"

namespace adamas {

enum class Metric { manhattan, euclidean_sq };

// Distances between bucket codes. Codes are small non-negative integers, so
// both metrics are exact in 32 bits for any realistic head dimension.
std::uint32_t manhattan_packed(const PackedCodes& a, const PackedCodes& b);
std::uint32_t l2sq_packed(const PackedCodes& a, const PackedCodes& b);
std::uint32_t manhattan_bytes(const CodeVector& a, const CodeVector& b);
std::uint32_t l2sq_bytes(const CodeVector& a, const CodeVector& b);

using DistanceScores = std::vector<std::int32_t>;

// Distance from one query code to every cached key code, in cache order.
DistanceScores score_all(const PackedCodes& query, const KvCache& cache, Metric metric);
DistanceScores score_all(const CodeVector& query, const KvCache& cache, Metric metric);

struct SelectionResult {
    std::vector<std::size_t> indices;  // ascending
};

// Indices of the k smallest scores; ties resolve toward the smaller index.
// Asking for more entries than exist selects everything.
SelectionResult top_k(const DistanceScores& scores, std::size_t k);

}  // namespace adamas
