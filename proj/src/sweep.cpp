#include "adamas/sweep.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include <json.hpp>

#include "adamas/attention.hpp"
#include "adamas/baselines.hpp"
#include "adamas/hadamard.hpp"
#include "adamas/quantizer.hpp"

namespace adamas {

namespace {

using ordered_json = nlohmann::ordered_json;

const char* metric_name(Metric metric) {
    return metric == Metric::manhattan ? "l1" : "l2";
}

Metric parse_metric(const std::string& name) {
    if (name == "l1" || name == "manhattan") return Metric::manhattan;
    if (name == "l2" || name == "euclidean_sq") return Metric::euclidean_sq;
    throw ConfigError("unknown metric: " + name);
}

// Quantization pipeline for one vector: optional transform, per-vector
// thresholds, bucketize.
CodeVector encode(std::span<const double> x, int bits, bool with_hadamard) {
    if (!with_hadamard) return bucketize(x, compute_thresholds(x, bits));
    const RealVector t = fwht(x, {.dim = x.size()});
    return bucketize(t, compute_thresholds(t, bits));
}

KvCache build_cache(const RealMatrix& keys, const RealMatrix& values, int bits,
                    bool with_hadamard) {
    KvCache cache(keys.cols(), bits);
    for (std::size_t i = 0; i < keys.rows(); ++i) {
        const CodeVector code = encode(keys.row(i), bits, with_hadamard);
        if (bits == 3) {
            cache.update(keys.row(i), values.row(i), code);
        } else {
            cache.update(keys.row(i), values.row(i), pack(code));
        }
    }
    return cache;
}

// Selection machinery for one (policy, key/value tensor) pairing, reusable
// across queries that share tensors. Holds the tensor alive so the identity
// check cannot be fooled by allocator address reuse.
struct PolicyState {
    std::shared_ptr<const RealMatrix> keys;
    std::optional<KvCache> cache;          // adamas
    std::optional<PageSummaries> pages;    // quest
};

void prepare_state(PolicyState& state, const PolicySpec& policy, const WorkloadInstance& inst) {
    if (state.keys == inst.keys) return;  // same tensors as the previous query
    state.keys = inst.keys;
    state.cache.reset();
    state.pages.reset();
    const RealMatrix& keys = *inst.keys;
    switch (policy.kind) {
        case PolicySpec::Kind::adamas:
            state.cache.emplace(
                build_cache(keys, *inst.values, policy.bits, policy.with_hadamard));
            break;
        case PolicySpec::Kind::quest: {
            state.pages.emplace(policy.page_size, keys.cols());
            for (std::size_t i = 0; i < keys.rows(); ++i) state.pages->append(keys.row(i));
            break;
        }
        default:
            break;
    }
}

SelectionResult select(const PolicyState& state, const PolicySpec& policy,
                       const WorkloadInstance& inst, std::span<const double> dot_scores,
                       std::size_t budget) {
    const std::size_t seq_len = inst.keys->rows();
    switch (policy.kind) {
        case PolicySpec::Kind::adamas: {
            DistanceScores scores;
            if (policy.bits == 3) {
                const CodeVector q_code = encode(inst.query, policy.bits, policy.with_hadamard);
                scores = score_all(q_code, *state.cache, policy.metric);
            } else {
                const PackedCodes q_code =
                    pack(encode(inst.query, policy.bits, policy.with_hadamard));
                scores = score_all(q_code, *state.cache, policy.metric);
            }
            return top_k(scores, budget);
        }
        case PolicySpec::Kind::window: {
            WindowPolicy w;
            w.sink = std::min(policy.sink, budget);
            w.recent = budget - w.sink;
            return window_select(seq_len, w);
        }
        case PolicySpec::Kind::quest:
            return page_select(inst.query, *state.pages, budget);
        case PolicySpec::Kind::oracle:
            return {top_k_by_score(dot_scores, budget)};
    }
    throw ConfigError("unknown policy kind");
}

double recall_against(const std::vector<std::size_t>& selected,
                      const std::vector<std::size_t>& oracle) {
    std::vector<std::size_t> common;
    std::set_intersection(selected.begin(), selected.end(), oracle.begin(), oracle.end(),
                          std::back_inserter(common));
    return oracle.empty() ? 1.0 : double(common.size()) / double(oracle.size());
}

AttentionOutput attend_subset(const WorkloadInstance& inst,
                              const std::vector<std::size_t>& indices) {
    RealMatrix keys(indices.size(), inst.keys->cols());
    RealMatrix values(indices.size(), inst.keys->cols());
    for (std::size_t r = 0; r < indices.size(); ++r) {
        const auto k = inst.keys->row(indices[r]);
        const auto v = inst.values->row(indices[r]);
        std::copy(k.begin(), k.end(), keys.row(r).begin());
        std::copy(v.begin(), v.end(), values.row(r).begin());
    }
    return full_attention(inst.query, keys, values);
}

// Shortest text that parses back to exactly this double (what the JSON
// library emits for numbers); integers print without an exponent or dot.
std::string format_number(double v) {
    return nlohmann::json(v).dump();
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string quoted = "\"";
    for (char c : field) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

}  // namespace

std::string PolicySpec::label() const {
    switch (kind) {
        case Kind::adamas: {
            std::string name =
                "adamas-" + std::to_string(bits) + "bit-" + metric_name(metric);
            if (!with_hadamard) name += "-nohadamard";
            return name;
        }
        case Kind::window:
            return "window-sink" + std::to_string(sink);
        case Kind::quest:
            return "quest-p" + std::to_string(page_size);
        case Kind::oracle:
            return "oracle";
    }
    return "?";
}

void PolicySpec::validate() const {
    if (kind == Kind::adamas && (bits < 1 || bits > 3))
        throw ConfigError("policy: adamas bits must be 1, 2, or 3");
    if (kind == Kind::quest && page_size == 0)
        throw ConfigError("policy: quest page_size must be positive");
}

void SweepConfig::validate() const {
    if (budgets.empty()) throw ConfigError("sweep: at least one budget required");
    for (std::size_t i = 0; i < budgets.size(); ++i) {
        if (budgets[i] == 0) throw ConfigError("sweep: budgets must be positive");
        if (i > 0 && budgets[i] <= budgets[i - 1])
            throw ConfigError("sweep: budgets must be strictly ascending");
    }
    if (policies.empty()) throw ConfigError("sweep: at least one policy required");
    for (const PolicySpec& policy : policies) policy.validate();
}

std::vector<ResultRow> run_sweep(const WorkloadSpec& workload_spec, const SweepConfig& sweep) {
    workload_spec.validate();
    sweep.validate();
    const Workload workload(workload_spec);

    // Cells are computed query-major so each instance's tensors are generated
    // once, then emitted policy-major for a stable, readable row order.
    std::vector<std::vector<ResultRow>> per_policy(sweep.policies.size());
    std::vector<PolicyState> states(sweep.policies.size());

    for (std::size_t qi = 0; qi < workload_spec.num_queries; ++qi) {
        const WorkloadInstance inst = workload.instance(qi);
        const std::size_t seq_len = inst.keys->rows();

        RealVector dot_scores(seq_len);
        for (std::size_t i = 0; i < seq_len; ++i)
            dot_scores[i] = dot(inst.query, inst.keys->row(i));
        std::optional<AttentionOutput> exact;
        if (sweep.measure_output_error)
            exact = full_attention(inst.query, *inst.keys, *inst.values);

        for (std::size_t pi = 0; pi < sweep.policies.size(); ++pi) {
            const PolicySpec& policy = sweep.policies[pi];
            prepare_state(states[pi], policy, inst);
            for (const std::size_t budget : sweep.budgets) {
                ResultRow row;
                row.policy = policy.label();
                row.budget = budget;
                row.seed = inst.seed;
                try {
                    const SelectionResult sel = select(states[pi], policy, inst, dot_scores,
                                                       budget);
                    const std::vector<std::size_t> oracle =
                        top_k_by_score(dot_scores, budget);
                    row.recall = recall_against(sel.indices, oracle);
                    row.selected_count = sel.indices.size();
                    if (exact) row.output_error = output_error(attend_subset(inst, sel.indices),
                                                               *exact);
                    if (inst.needle_position)
                        row.needle_hit = std::binary_search(sel.indices.begin(),
                                                            sel.indices.end(),
                                                            *inst.needle_position);
                } catch (const ConfigError& e) {
                    throw ConfigError("policy=" + row.policy + " budget=" +
                                      std::to_string(budget) + ": " + e.what());
                }
                per_policy[pi].push_back(std::move(row));
            }
        }
    }

    std::vector<ResultRow> rows;
    for (std::size_t pi = 0; pi < per_policy.size(); ++pi) {
        // Within one policy the rows were produced query-major; reorder to
        // budget-major (stable: queries stay ascending inside each budget).
        std::vector<ResultRow>& block = per_policy[pi];
        std::stable_sort(block.begin(), block.end(),
                         [](const ResultRow& a, const ResultRow& b) {
                             return a.budget < b.budget;
                         });
        rows.insert(rows.end(), std::make_move_iterator(block.begin()),
                    std::make_move_iterator(block.end()));
    }
    return rows;
}

std::vector<NeedleSummaryRow> needle_report(const std::vector<ResultRow>& rows) {
    if (rows.empty()) throw ConfigError("needle_report: no rows");
    std::vector<NeedleSummaryRow> summary;
    std::map<std::pair<std::string, std::size_t>, std::size_t> index;
    for (const ResultRow& row : rows) {
        if (!row.needle_hit.has_value())
            throw ConfigError("needle_report: rows are not from a planted-needle workload");
        const auto key = std::make_pair(row.policy, row.budget);
        auto [it, inserted] = index.try_emplace(key, summary.size());
        if (inserted)
            summary.push_back({.policy = row.policy, .budget = row.budget});
        NeedleSummaryRow& cell = summary[it->second];
        cell.needle_fraction += *row.needle_hit ? 1.0 : 0.0;
        cell.queries += 1;
    }
    for (NeedleSummaryRow& cell : summary) cell.needle_fraction /= double(cell.queries);
    return summary;  // first-appearance order == sweep row order
}

EmitFormat parse_emit_format(const std::string& name) {
    if (name == "csv") return EmitFormat::csv;
    if (name == "json") return EmitFormat::json;
    throw ConfigError("unknown output format: " + name);
}

std::string rows_to_csv(const std::vector<ResultRow>& rows) {
    std::string out = "policy,budget,seed,recall,output_error,selected_count\n";
    for (const ResultRow& row : rows) {
        out += csv_escape(row.policy);
        out += ',';
        out += std::to_string(row.budget);
        out += ',';
        out += std::to_string(row.seed);
        out += ',';
        out += format_number(row.recall);
        out += ',';
        if (row.output_error) out += format_number(*row.output_error);
        out += ',';
        out += std::to_string(row.selected_count);
        out += '\n';
    }
    return out;
}

std::string rows_to_json(const std::vector<ResultRow>& rows) {
    ordered_json doc = ordered_json::array();
    for (const ResultRow& row : rows) {
        ordered_json r;
        r["policy"] = row.policy;
        r["budget"] = row.budget;
        r["seed"] = row.seed;
        r["recall"] = row.recall;
        r["output_error"] = row.output_error ? ordered_json(*row.output_error)
                                             : ordered_json(nullptr);
        r["selected_count"] = row.selected_count;
        doc.push_back(std::move(r));
    }
    return doc.dump(2) + "\n";
}

std::string needle_summary_to_csv(const std::vector<NeedleSummaryRow>& rows) {
    std::string out = "policy,budget,needle_fraction,queries\n";
    for (const NeedleSummaryRow& row : rows) {
        out += csv_escape(row.policy);
        out += ',';
        out += std::to_string(row.budget);
        out += ',';
        out += format_number(row.needle_fraction);
        out += ',';
        out += std::to_string(row.queries);
        out += '\n';
    }
    return out;
}

void emit(const std::vector<ResultRow>& rows, EmitFormat format,
          const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);  // binary: LF endings everywhere
    if (!os) throw std::runtime_error("emit: cannot open " + path.string());
    os << (format == EmitFormat::csv ? rows_to_csv(rows) : rows_to_json(rows));
    if (!os) throw std::runtime_error("emit: write failed for " + path.string());
}

HarnessConfig parse_harness_config(const std::string& json_text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    try {
        HarnessConfig config;
        const auto& w = doc.at("workload");
        config.workload.seed = w.value("seed", std::uint64_t{0});
        config.workload.seq_len = w.at("seq_len").get<std::size_t>();
        config.workload.head_dim = w.at("head_dim").get<std::size_t>();
        config.workload.num_queries = w.value("num_queries", std::size_t{1});
        config.workload.distribution =
            parse_distribution(w.value("distribution", std::string("gaussian")));
        config.workload.outlier_frac = w.value("outlier_frac", config.workload.outlier_frac);
        config.workload.outlier_scale = w.value("outlier_scale", config.workload.outlier_scale);
        config.workload.position = w.value("position", config.workload.position);
        config.workload.snr = w.value("snr", config.workload.snr);

        const auto& s = doc.at("sweep");
        config.sweep.budgets = s.at("budgets").get<std::vector<std::size_t>>();
        for (const auto& p : s.at("policies")) {
            PolicySpec policy;
            const std::string kind = p.at("kind").get<std::string>();
            if (kind == "adamas") {
                policy.kind = PolicySpec::Kind::adamas;
                policy.bits = p.value("bits", policy.bits);
                policy.metric = parse_metric(p.value("metric", std::string("l1")));
                policy.with_hadamard = p.value("with_hadamard", policy.with_hadamard);
            } else if (kind == "window") {
                policy.kind = PolicySpec::Kind::window;
                policy.sink = p.value("sink", policy.sink);
            } else if (kind == "quest") {
                policy.kind = PolicySpec::Kind::quest;
                policy.page_size = p.value("page_size", policy.page_size);
            } else if (kind == "oracle") {
                policy.kind = PolicySpec::Kind::oracle;
            } else {
                throw ConfigError("config: unknown policy kind: " + kind);
            }
            config.sweep.policies.push_back(policy);
        }
        if (s.contains("metrics")) {
            const auto metrics = s.at("metrics").get<std::vector<std::string>>();
            config.sweep.measure_output_error = false;
            for (const std::string& m : metrics) {
                if (m == "output_error") {
                    config.sweep.measure_output_error = true;
                } else if (m != "recall") {
                    throw ConfigError("config: unknown metric: " + m);
                }
            }
        }
        config.workload.validate();
        config.sweep.validate();
        return config;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

HarnessConfig load_harness_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open " + path.string());
    std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return parse_harness_config(text);
}

}  // namespace adamas
