#include "adamas/baselines.hpp"

#include <algorithm>
#include <numeric>

namespace adamas {

SelectionResult window_select(std::size_t seq_len, const WindowPolicy& policy) {
    SelectionResult result;
    if (policy.sink + policy.recent >= seq_len) {
        result.indices.resize(seq_len);
        std::iota(result.indices.begin(), result.indices.end(), std::size_t{0});
        return result;
    }
    for (std::size_t i = 0; i < policy.sink; ++i) result.indices.push_back(i);
    for (std::size_t i = seq_len - policy.recent; i < seq_len; ++i)
        result.indices.push_back(i);
    return result;  // disjoint by the guard above, already sorted
}

std::vector<std::size_t> top_k_by_score(std::span<const double> scores, std::size_t k) {
    std::vector<std::size_t> indices(scores.size());
    std::iota(indices.begin(), indices.end(), std::size_t{0});
    if (k >= indices.size()) return indices;
    std::nth_element(indices.begin(), indices.begin() + static_cast<std::ptrdiff_t>(k),
                     indices.end(), [&](std::size_t a, std::size_t b) {
                         return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
                     });
    indices.resize(k);
    std::sort(indices.begin(), indices.end());
    return indices;
}

PageSummaries::PageSummaries(std::size_t page_size, std::size_t head_dim)
    : page_size_(page_size), head_dim_(head_dim) {
    if (page_size == 0) throw ConfigError("PageSummaries: page_size must be positive");
    if (head_dim == 0) throw ConfigError("PageSummaries: head_dim must be positive");
}

void PageSummaries::append(std::span<const double> key) {
    if (key.size() != head_dim_) throw ConfigError("PageSummaries: key length mismatch");
    if (seq_len_ % page_size_ == 0) {
        // A fresh page starts out summarizing just this key.
        mins_.insert(mins_.end(), key.begin(), key.end());
        maxs_.insert(maxs_.end(), key.begin(), key.end());
    } else {
        double* mn = mins_.data() + (num_pages() - 1) * head_dim_;
        double* mx = maxs_.data() + (num_pages() - 1) * head_dim_;
        for (std::size_t j = 0; j < head_dim_; ++j) {
            mn[j] = std::min(mn[j], key[j]);
            mx[j] = std::max(mx[j], key[j]);
        }
    }
    ++seq_len_;
}

RealVector page_scores(std::span<const double> q, const PageSummaries& pages) {
    if (q.size() != pages.head_dim()) throw ConfigError("page_scores: query length mismatch");
    RealVector scores(pages.num_pages(), 0.0);
    for (std::size_t p = 0; p < pages.num_pages(); ++p) {
        const auto mn = pages.page_min(p);
        const auto mx = pages.page_max(p);
        double s = 0.0;
        for (std::size_t j = 0; j < q.size(); ++j) s += std::max(q[j] * mn[j], q[j] * mx[j]);
        scores[p] = s;
    }
    return scores;
}

SelectionResult page_select(std::span<const double> q, const PageSummaries& pages,
                            std::size_t k) {
    SelectionResult result;
    const std::size_t seq_len = pages.seq_len();
    if (k >= seq_len) {
        result.indices.resize(seq_len);
        std::iota(result.indices.begin(), result.indices.end(), std::size_t{0});
        return result;
    }
    if (k % pages.page_size() != 0)
        throw ConfigError("page_select: budget must be a multiple of the page size");

    const RealVector scores = page_scores(q, pages);
    const std::vector<std::size_t> order = top_k_by_score(scores, k / pages.page_size());

    for (std::size_t p : order) {
        const std::size_t first = p * pages.page_size();
        const std::size_t last = std::min(first + pages.page_size(), seq_len);
        for (std::size_t i = first; i < last; ++i) result.indices.push_back(i);
    }
    return result;
}

SelectionResult oracle_select(std::span<const double> q, const KvCache& cache, std::size_t k) {
    if (k == 0) throw ConfigError("oracle_select: budget must be positive");
    if (q.size() != cache.head_dim()) throw ConfigError("oracle_select: query length mismatch");
    const std::size_t n = cache.seq_len();
    RealVector scores(n);
    for (std::size_t i = 0; i < n; ++i) scores[i] = dot(q, cache.key_row(i));
    return {top_k_by_score(scores, k)};
}

}  // namespace adamas
