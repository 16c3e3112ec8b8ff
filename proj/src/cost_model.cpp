#include "adamas/cost_model.hpp"

#include <cmath>

#include <json.hpp>

namespace adamas {

namespace {

using ordered_json = nlohmann::ordered_json;

double qkv_projection_flops(const CostParams& c) {
    return 2.0 * c.b * c.h * (c.h + 2.0 * c.h_kv);
}

CostRow qkv_projection_memory(const CostParams& c) {
    return {.component = "QKV projection",
            .read = c.b * double(c.h) + double(c.h) * (c.h + 2.0 * c.h_kv) +
                    (c.h + 2.0 * c.h_kv),
            .write = c.b * (c.h + 2.0 * c.h_kv)};
}

CostRow attention_memory(const CostParams& c) {
    return {.component = "A = softmax(QK^T) V",
            .read = c.b * double(c.h) + 2.0 * c.b * c.s * c.h_kv,
            .write = c.b * double(c.h)};
}

CostRow output_projection_memory(const CostParams& c, bool extra_weight_write) {
    return {.component = "Output projection",
            .read = c.b * double(c.h) + double(c.h) * c.h,
            .write = c.b * double(c.h) + (extra_weight_write ? double(c.h) * c.h : 0.0)};
}

void finalize(CostReport& report) {
    for (const CostRow& row : report.rows) {
        report.total_flops += row.flops;
        report.total_read += row.read;
        report.total_write += row.write;
    }
}

ordered_json rows_to_json(const CostReport& report) {
    ordered_json rows = ordered_json::array();
    for (const CostRow& row : report.rows) {
        ordered_json r;
        r["component"] = row.component;
        if (report.kind == "flops") {
            r["flops"] = row.flops;
        } else {
            r["read"] = row.read;
            r["write"] = row.write;
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace

void CostParams::validate() const {
    const auto positive = [](std::int64_t v, const char* name) {
        if (v < 1)
            throw ConfigError(std::string("cost model: ") + name + " must be positive");
    };
    positive(b, "b");
    positive(s, "s");
    positive(h, "h");
    positive(h_kv, "h_kv");
    positive(d, "d");
    positive(n, "n");
    positive(p, "p");
    positive(k, "k");
    if (h % d != 0) throw ConfigError("cost model: h must be divisible by d");
}

CostMethod parse_cost_method(const std::string& name) {
    if (name == "full") return CostMethod::full;
    if (name == "quest") return CostMethod::quest;
    if (name == "adamas") return CostMethod::adamas;
    throw ConfigError("unknown cost method: " + name);
}

const char* cost_method_name(CostMethod method) {
    switch (method) {
        case CostMethod::full: return "full";
        case CostMethod::quest: return "quest";
        case CostMethod::adamas: return "adamas";
    }
    return "?";
}

CostReport flops_full(const CostParams& c) {
    c.validate();
    CostReport report{.method = "full", .kind = "flops", .rows = {}};
    report.rows = {
        {.component = "QKV projection", .flops = qkv_projection_flops(c)},
        {.component = "P = softmax(QK^T)", .flops = 2.0 * c.b * c.s * c.h},
        {.component = "PV", .flops = 2.0 * c.b * c.s * c.h},
        {.component = "Output projection", .flops = 2.0 * c.b * double(c.h) * c.h},
    };
    report.closed_form_flops = 4.0 * (c.h + c.h_kv + double(c.s)) * c.b * c.h;
    finalize(report);
    return report;
}

CostReport flops_quest(const CostParams& c) {
    c.validate();
    if (c.k % c.p != 0)
        throw ConfigError("cost model: quest requires the budget k to be a multiple of p");
    if (c.k / c.p < 2)
        throw ConfigError("cost model: quest requires at least two pages selected (k/p >= 2)");
    const double log_pages = std::log2(double(c.k) / double(c.p));
    CostReport report{.method = "quest", .kind = "flops", .rows = {}};
    report.rows = {
        {.component = "QKV projection", .flops = qkv_projection_flops(c)},
        {.component = "Reduce keys", .flops = 2.0 * c.p * c.h},
        {.component = "QK element-wise product", .flops = 2.0 / c.p * c.b * c.s * c.h},
        {.component = "Per channel max", .flops = 1.0 / c.p * c.b * c.s * c.h},
        {.component = "Page sum", .flops = 1.0 / c.p * c.b * c.s * c.h},
        {.component = "Top-k", .flops = 4.0 * log_pages / (c.p * double(c.d)) * c.b * c.s * c.h},
        {.component = "P = softmax(QK^T)", .flops = 2.0 * c.b * c.k * double(c.h)},
        {.component = "PV", .flops = 2.0 * c.b * c.k * double(c.h)},
        {.component = "Output projection", .flops = 2.0 * c.b * double(c.h) * c.h},
    };
    report.closed_form_flops =
        (4.0 * c.h + 4.0 * c.h_kv + (4.0 / c.p + 4.0 * log_pages / (c.p * double(c.d))) * c.s +
         4.0 * c.k) *
            c.b * c.h +
        2.0 * c.p * c.h;
    finalize(report);
    return report;
}

CostReport flops_adamas(const CostParams& c) {
    c.validate();
    if (c.k < 2) throw ConfigError("cost model: adamas top-k term requires k >= 2");
    const double log_k = std::log2(double(c.k));
    CostReport report{.method = "adamas", .kind = "flops", .rows = {}};
    report.rows = {
        {.component = "QKV projection", .flops = qkv_projection_flops(c)},
        {.component = "Hadamard transform", .flops = 2.0 * c.b * c.h},
        {.component = "Bucketization", .flops = 2.0 * c.n * double(c.b) * c.h},
        {.component = "Manhattan-distance estimation", .flops = 3.0 * c.b * c.s * double(c.h)},
        {.component = "Top-k", .flops = 4.0 * log_k / c.d * c.b * c.s * double(c.h)},
        {.component = "P = softmax(QK^T)", .flops = 2.0 * c.b * c.k * double(c.h)},
        {.component = "PV", .flops = 2.0 * c.b * c.k * double(c.h)},
        {.component = "Output projection", .flops = 2.0 * c.b * double(c.h) * c.h},
    };
    report.closed_form_flops =
        (4.0 * c.h + 4.0 * c.h_kv + 2.0 * c.n + 2.0 + (4.0 * log_k / c.d + 3.0) * c.s +
         4.0 * c.k) *
        c.b * c.h;
    finalize(report);
    return report;
}

CostReport memory_full(const CostParams& c) {
    c.validate();
    CostReport report{.method = "full", .kind = "memory", .rows = {}};
    report.rows = {
        qkv_projection_memory(c),
        attention_memory(c),
        output_projection_memory(c, /*extra_weight_write=*/false),
    };
    report.closed_form_read = 3.0 * c.b * c.h + 2.0 * c.b * c.s * double(c.h_kv) +
                              2.0 * double(c.h) * c.h + 2.0 * double(c.h) * c.h_kv + c.h +
                              c.h_kv;
    report.closed_form_write = 3.0 * c.b * c.h + 2.0 * c.b * double(c.h_kv);
    finalize(report);
    return report;
}

CostReport memory_quest(const CostParams& c) {
    c.validate();
    CostReport report{.method = "quest", .kind = "memory", .rows = {}};
    report.rows = {
        qkv_projection_memory(c),
        {.component = "Reduce keys", .read = 3.0 * c.b * c.h, .write = 2.0 * c.p * double(c.h)},
        {.component = "Criticality estimation",
         .read = 2.0 * c.b * c.s * double(c.h) / c.p + c.b * double(c.h),
         .write = c.b * c.s * double(c.h) / (c.p * double(c.d))},
        {.component = "Top-k",
         .read = c.b * c.s * double(c.h) / (c.p * double(c.d)),
         .write = c.b * c.k * double(c.h) / (c.p * double(c.d))},
        attention_memory(c),
        output_projection_memory(c, /*extra_weight_write=*/false),
    };
    report.closed_form_read = 7.0 * c.b * c.h +
                              (2.0 * c.d + 1.0) / (c.p * double(c.d)) * c.b * c.s * c.h +
                              2.0 * c.b * c.k * double(c.h_kv) + 2.0 * double(c.h) * c.h +
                              2.0 * double(c.h) * c.h_kv + c.h + 2.0 * c.h_kv;
    report.closed_form_write =
        (5.0 + (c.s + double(c.k)) / (c.p * double(c.d))) * c.b * c.h +
        2.0 * c.b * double(c.h_kv);
    finalize(report);
    return report;
}

CostReport memory_adamas(const CostParams& c) {
    c.validate();
    CostReport report{.method = "adamas", .kind = "memory", .rows = {}};
    report.rows = {
        qkv_projection_memory(c),
        {.component = "Hadamard transform",
         .read = 2.0 * c.b * c.h + 2.0 * double(c.h) * c.d * c.d,
         .write = 2.0 * c.b * double(c.h)},
        {.component = "Bucketization",
         .read = 2.0 * c.b * double(c.h),
         .write = c.b * double(c.h) / 4.0},
        {.component = "Manhattan-distance estimation",
         .read = (c.b * double(c.h) + c.b * c.s * double(c.h)) / 8.0,
         .write = c.b * c.s * double(c.h) / c.d},
        {.component = "Top-k",
         .read = c.b * c.s * double(c.h) / c.d,
         .write = c.b * c.k * double(c.h) / c.d},
        attention_memory(c),
        output_projection_memory(c, /*extra_weight_write=*/true),
    };
    report.closed_form_read = 57.0 / 8.0 * c.b * c.h + c.b * c.s * double(c.h) / c.d +
                              2.0 * c.b * c.k * double(c.h_kv) + 2.0 * double(c.d) * c.d +
                              2.0 * double(c.h) * c.h + 2.0 * double(c.h) * c.h_kv + c.h +
                              2.0 * c.h_kv;
    report.closed_form_write = (21.0 / 4.0 + (c.s + double(c.k)) / c.d) * c.b * c.h +
                               2.0 * c.b * double(c.h_kv);
    finalize(report);
    return report;
}

double memory_bytes(double element_accesses, std::size_t bytes_per_element) {
    return element_accesses * double(bytes_per_element);
}

double memory_summary_residual_read(CostMethod method, const CostParams& c) {
    switch (method) {
        case CostMethod::full:
            return double(c.h_kv);
        case CostMethod::quest:
            return 2.0 * c.b * (c.s - double(c.k)) * c.h_kv;
        case CostMethod::adamas:
            return c.b * c.s * double(c.h) / 8.0 + 2.0 * double(c.d) * c.d * (c.h - 1.0) +
                   2.0 * c.b * (c.s - double(c.k)) * c.h_kv;
    }
    return 0.0;
}

double memory_summary_residual_write(CostMethod method, const CostParams& c) {
    switch (method) {
        case CostMethod::full:
            return 0.0;
        case CostMethod::quest:
            return 2.0 * c.p * double(c.h) - 2.0 * c.b * double(c.h);
        case CostMethod::adamas:
            return double(c.h) * c.h;
    }
    return 0.0;
}

std::string cost_report_to_json(const CostReport& flops, const CostReport& memory,
                                const CostParams& params) {
    ordered_json doc;
    doc["method"] = flops.method;
    doc["params"] = {{"b", params.b}, {"s", params.s}, {"h", params.h},
                     {"h_kv", params.h_kv}, {"d", params.d}, {"n", params.n},
                     {"p", params.p}, {"k", params.k}};
    doc["flops"] = {{"rows", rows_to_json(flops)},
                    {"total", flops.total_flops},
                    {"closed_form", flops.closed_form_flops}};
    doc["memory"] = {{"rows", rows_to_json(memory)},
                     {"total_read", memory.total_read},
                     {"total_write", memory.total_write},
                     {"closed_form_read", memory.closed_form_read},
                     {"closed_form_write", memory.closed_form_write}};
    return doc.dump(2) + "\n";
}

}  // namespace adamas
