#include "adamas/estimator.hpp"

#include <algorithm>
#include <numeric>

#include "adamas/kernels.hpp"

namespace adamas {

namespace {

void check_pair(int a_bits, std::size_t a_len, int b_bits, std::size_t b_len) {
    if (a_bits != b_bits) throw ConfigError("distance: code widths differ");
    if (a_len != b_len) throw ConfigError("distance: code lengths differ");
}

}  // namespace

std::uint32_t manhattan_packed(const PackedCodes& a, const PackedCodes& b) {
    check_pair(a.bits, a.len, b.bits, b.len);
    const auto& k = kernels::active_kernels();
    if (a.bits == 1) return k.l1_1bit(a.words.data(), b.words.data(), a.words.size());
    return k.l1_2bit(a.words.data(), b.words.data(), a.words.size());
}

std::uint32_t l2sq_packed(const PackedCodes& a, const PackedCodes& b) {
    check_pair(a.bits, a.len, b.bits, b.len);
    // 1-bit codes differ by 0 or 1 per lane, so the squared metric coincides
    // with the popcount path.
    const auto& k = kernels::active_kernels();
    if (a.bits == 1) return k.l1_1bit(a.words.data(), b.words.data(), a.words.size());
    return k.l2_2bit(a.words.data(), b.words.data(), a.words.size());
}

std::uint32_t manhattan_bytes(const CodeVector& a, const CodeVector& b) {
    check_pair(a.bits, a.codes.size(), b.bits, b.codes.size());
    return kernels::active_kernels().l1_bytes(a.codes.data(), b.codes.data(), a.codes.size());
}

std::uint32_t l2sq_bytes(const CodeVector& a, const CodeVector& b) {
    check_pair(a.bits, a.codes.size(), b.bits, b.codes.size());
    return kernels::active_kernels().l2_bytes(a.codes.data(), b.codes.data(), a.codes.size());
}

DistanceScores score_all(const PackedCodes& query, const KvCache& cache, Metric metric) {
    if (cache.bits() == 3) throw ConfigError("score_all: packed query against byte cache");
    if (query.bits != cache.bits()) throw ConfigError("score_all: code widths differ");
    if (query.words.size() != cache.words_per_code())
        throw ConfigError("score_all: code length differs");
    const auto& k = kernels::active_kernels();
    auto* fn = metric == Metric::manhattan ? (query.bits == 1 ? k.l1_1bit : k.l1_2bit)
                                           : (query.bits == 1 ? k.l1_1bit : k.l2_2bit);
    DistanceScores scores(cache.seq_len());
    const std::size_t nwords = cache.words_per_code();
    for (std::size_t i = 0; i < scores.size(); ++i)
        scores[i] = static_cast<std::int32_t>(
            fn(query.words.data(), cache.code_words(i).data(), nwords));
    return scores;
}

DistanceScores score_all(const CodeVector& query, const KvCache& cache, Metric metric) {
    if (cache.bits() != 3) throw ConfigError("score_all: byte query against packed cache");
    if (query.bits != cache.bits()) throw ConfigError("score_all: code widths differ");
    if (query.codes.size() != cache.head_dim())
        throw ConfigError("score_all: code length differs");
    const auto& k = kernels::active_kernels();
    auto* fn = metric == Metric::manhattan ? k.l1_bytes : k.l2_bytes;
    DistanceScores scores(cache.seq_len());
    for (std::size_t i = 0; i < scores.size(); ++i)
        scores[i] = static_cast<std::int32_t>(
            fn(query.codes.data(), cache.code_bytes(i).data(), query.codes.size()));
    return scores;
}

SelectionResult top_k(const DistanceScores& scores, std::size_t k) {
    SelectionResult result;
    const std::size_t n = scores.size();
    result.indices.resize(n);
    std::iota(result.indices.begin(), result.indices.end(), std::size_t{0});
    if (k >= n) return result;
    // Ordering by (score, index) makes the selection deterministic under ties
    // and leaves the kept prefix free to be re-sorted by index alone.
    std::nth_element(result.indices.begin(), result.indices.begin() + static_cast<std::ptrdiff_t>(k),
                     result.indices.end(), [&](std::size_t a, std::size_t b) {
                         return scores[a] != scores[b] ? scores[a] < scores[b] : a < b;
                     });
    result.indices.resize(k);
    std::sort(result.indices.begin(), result.indices.end());
    return result;
}

}  // namespace adamas
