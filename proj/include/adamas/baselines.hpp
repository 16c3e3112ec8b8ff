#pragma once

#include <span>

#include "adamas/estimator.hpp"
#include "adamas/kv_cache.hpp"

namespace adamas {

// Sink-plus-recency selection: keep the first `sink` and last `recent`
// tokens. The two counts add up to the token budget.
struct WindowPolicy {
    std::size_t sink = 0;
    std::size_t recent = 0;
};

SelectionResult window_select(std::size_t seq_len, const WindowPolicy& policy);

// Indices of the k largest scores, ties to the smaller index, ascending
// output; k >= scores.size() returns every index.
std::vector<std::size_t> top_k_by_score(std::span<const double> scores, std::size_t k);

// Elementwise min/max key summaries per fixed-size page, maintained
// incrementally as keys append (single writer).
class PageSummaries {
public:
    PageSummaries(std::size_t page_size, std::size_t head_dim);

    void append(std::span<const double> key);

    std::size_t page_size() const { return page_size_; }
    std::size_t head_dim() const { return head_dim_; }
    std::size_t seq_len() const { return seq_len_; }
    std::size_t num_pages() const { return mins_.size() / head_dim_; }
    std::span<const double> page_min(std::size_t page) const {
        return {mins_.data() + page * head_dim_, head_dim_};
    }
    std::span<const double> page_max(std::size_t page) const {
        return {maxs_.data() + page * head_dim_, head_dim_};
    }

private:
    std::size_t page_size_;
    std::size_t head_dim_;
    std::size_t seq_len_ = 0;
    std::vector<double> mins_;  // num_pages x head_dim, row-major
    std::vector<double> maxs_;
};

// Channelwise upper bound on q . k over any key k in each page:
// score(page) = sum_j max(q_j * min_j, q_j * max_j).
RealVector page_scores(std::span<const double> q, const PageSummaries& pages);

// All tokens of the k/page_size best-scoring pages (ties to the smaller page
// index). The budget k counts tokens and must divide evenly into pages;
// k >= seq_len selects everything.
SelectionResult page_select(std::span<const double> q, const PageSummaries& pages,
                            std::size_t k);

// Exact top-k by true dot product q . K_i — the recall ground truth. Ties go
// to the smaller index; k >= seq_len selects everything.
SelectionResult oracle_select(std::span<const double> q, const KvCache& cache, std::size_t k);

}  // namespace adamas
