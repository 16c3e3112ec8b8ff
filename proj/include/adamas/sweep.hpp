#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "adamas/estimator.hpp"
#include "adamas/workload.hpp"

namespace adamas {

// One selection policy of a sweep. `kind` decides which of the remaining
// fields apply.
struct PolicySpec {
    enum class Kind { adamas, window, quest, oracle };

    Kind kind = Kind::adamas;
    // adamas
    int bits = 2;
    Metric metric = Metric::manhattan;
    bool with_hadamard = true;
    // window
    std::size_t sink = 4;
    // quest
    std::size_t page_size = 16;

    // Stable human-readable name used as the CSV/JSON policy column, e.g.
    // "adamas-2bit-l1", "adamas-2bit-l1-nohadamard", "window-sink4",
    // "quest-p16", "oracle".
    std::string label() const;

    void validate() const;
};

struct SweepConfig {
    std::vector<std::size_t> budgets;  // ascending, positive
    std::vector<PolicySpec> policies;
    // recall is always measured (it is the cheap, primary metric);
    // output_error is measured only when requested.
    bool measure_output_error = true;

    void validate() const;
};

struct ResultRow {
    std::string policy;
    std::size_t budget = 0;
    std::uint64_t seed = 0;  // per-query instance seed
    double recall = 0.0;     // |selected ∩ exact-top-k| / min(k, seq_len)
    std::optional<double> output_error;
    std::size_t selected_count = 0;
    // Set on planted-needle workloads only; consumed by needle_report, never
    // serialized by emit().
    std::optional<bool> needle_hit;
};

// Runs every (policy, budget, query) cell. Row order: policies in config
// order, then budgets in config order, then queries ascending. Deterministic
// given the workload seed.
std::vector<ResultRow> run_sweep(const WorkloadSpec& workload, const SweepConfig& sweep);

struct NeedleSummaryRow {
    std::string policy;
    std::size_t budget = 0;
    double needle_fraction = 0.0;  // queries whose selection held the needle
    std::size_t queries = 0;
};

// Per policy x budget needle-hit fractions. Requires rows from a
// planted-needle workload (every row carries needle information).
std::vector<NeedleSummaryRow> needle_report(const std::vector<ResultRow>& rows);

enum class EmitFormat { csv, json };
EmitFormat parse_emit_format(const std::string& name);

// Byte-deterministic serializations: CSV with the fixed header
// policy,budget,seed,recall,output_error,selected_count (RFC 4180 quoting,
// LF endings, empty field for an absent output_error), or a JSON array of
// row objects (null for an absent output_error).
std::string rows_to_csv(const std::vector<ResultRow>& rows);
std::string rows_to_json(const std::vector<ResultRow>& rows);
std::string needle_summary_to_csv(const std::vector<NeedleSummaryRow>& rows);

void emit(const std::vector<ResultRow>& rows, EmitFormat format,
          const std::filesystem::path& path);

// Config-file schema shared by the sweep and needle subcommands: a JSON
// object {"workload": {...}, "sweep": {...}} mirroring WorkloadSpec and
// SweepConfig field names.
struct HarnessConfig {
    WorkloadSpec workload;
    SweepConfig sweep;
};

HarnessConfig parse_harness_config(const std::string& json_text);
HarnessConfig load_harness_config(const std::filesystem::path& path);

}  // namespace adamas
