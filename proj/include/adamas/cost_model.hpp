#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "adamas/common.hpp"

namespace adamas {

// Symbols of the analytic decode-step cost model. One decode step over a
// cache of s tokens; h must split evenly into heads of dimension d.
struct CostParams {
    std::int64_t b = 1;       // batch size
    std::int64_t s = 1;       // sequence length (cached tokens)
    std::int64_t h = 1;       // hidden dimension
    std::int64_t h_kv = 1;    // key/value hidden dimension
    std::int64_t d = 1;       // head dimension
    std::int64_t n = 4;       // number of bucket levels
    std::int64_t p = 16;      // page size
    std::int64_t k = 1;       // selected tokens

    void validate() const;
};

enum class CostMethod { full, quest, adamas };

CostMethod parse_cost_method(const std::string& name);
const char* cost_method_name(CostMethod method);

// One accounting row. Counts are reals because some formulas carry log or
// 1/p factors; integer-valued formulas evaluate exactly in doubles for any
// realistic parameter range.
struct CostRow {
    std::string component;
    double flops = 0.0;  // FLOPs (kind == flops)
    double read = 0.0;   // element reads (kind == memory)
    double write = 0.0;  // element writes (kind == memory)
};

// A per-component cost table plus its closed-form one-line summary. Totals
// are always the row sums. The summaries for the FLOP tables equal the row
// sums identically; the memory summaries differ from their rows by fixed
// residual terms (the source accounting drops or merges a few terms when
// summarizing), exposed via memory_summary_residual_* below and documented
// in the README.
struct CostReport {
    std::string method;
    std::string kind;  // "flops" | "memory"
    std::vector<CostRow> rows;
    double total_flops = 0.0;
    double total_read = 0.0;
    double total_write = 0.0;
    double closed_form_flops = 0.0;
    double closed_form_read = 0.0;
    double closed_form_write = 0.0;
};

// FLOP tables. Quest requires k divisible by p and k/p >= 2 (its top-k term
// carries log2(k/p)); the adamas table requires k >= 2 for log2(k).
CostReport flops_full(const CostParams& params);
CostReport flops_quest(const CostParams& params);
CostReport flops_adamas(const CostParams& params);

// Memory-access tables, in element accesses (width-agnostic).
CostReport memory_full(const CostParams& params);
CostReport memory_quest(const CostParams& params);
CostReport memory_adamas(const CostParams& params);

// Element accesses -> bytes at a given element width.
double memory_bytes(double element_accesses, std::size_t bytes_per_element);

// Exact residuals total_read - closed_form_read and total_write -
// closed_form_write for each memory table (zero for the full-attention
// write column only).
double memory_summary_residual_read(CostMethod method, const CostParams& params);
double memory_summary_residual_write(CostMethod method, const CostParams& params);

// Stable-field-order JSON for CLI output.
std::string cost_report_to_json(const CostReport& flops, const CostReport& memory,
                                const CostParams& params);

}  // namespace adamas
