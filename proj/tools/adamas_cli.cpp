// Benchmark harness for the sparse-selection pipeline: synthetic workload
// sweeps, needle-retrieval summaries, the analytic cost model, and a quick
// self-test of the kernels against their oracles.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime error.
#include <cstdio>
#include <iostream>
#include <random>

#include <CLI11.hpp>

#include "adamas/attention.hpp"
#include "adamas/baselines.hpp"
#include "adamas/cost_model.hpp"
#include "adamas/estimator.hpp"
#include "adamas/hadamard.hpp"
#include "adamas/kernels.hpp"
#include "adamas/quantizer.hpp"
#include "adamas/sweep.hpp"
#include "adamas/workload.hpp"

namespace {

using namespace adamas;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct SelfTestFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void expect(bool ok, const std::string& what) {
    if (!ok) throw SelfTestFailure("selftest: " + what);
}

// Quick oracle-equivalence pass over every numeric kernel; seconds, not
// minutes. The full property suites live in tests/.
void run_selftest() {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> normal;

    // Transform vs explicit matrix product, and involution.
    for (std::size_t d : {2u, 16u, 128u}) {
        RealVector x(d);
        for (auto& v : x) v = normal(rng);
        const auto fast = fwht(x, {.dim = d});
        const auto matrix = hadamard_matrix({.dim = d});
        for (std::size_t j = 0; j < d; ++j) {
            double slow = 0.0;
            for (std::size_t i = 0; i < d; ++i) slow += x[i] * matrix(i, j);
            expect(std::abs(fast[j] - slow) <= 1e-10 * std::max(1.0, std::abs(slow)),
                   "transform disagrees with matrix oracle");
        }
        const auto back = fwht(fast, {.dim = d});
        for (std::size_t i = 0; i < d; ++i)
            expect(std::abs(back[i] - x[i]) <= 1e-10, "transform is not involutive");
    }
    std::puts("[ok] hadamard transform matches matrix oracle");

    // Packed distances vs unpack-and-loop.
    std::uniform_int_distribution<std::uint32_t> word(0, 0xFFFF);
    for (int bits : {1, 2}) {
        for (int rep = 0; rep < 2000; ++rep) {
            PackedCodes a{.words = {}, .len = 0, .bits = bits};
            PackedCodes b = a;
            for (int w = 0; w < 16; ++w) {
                a.words.push_back(static_cast<std::uint16_t>(word(rng)));
                b.words.push_back(static_cast<std::uint16_t>(word(rng)));
            }
            a.len = b.len = a.words.size() * a.codes_per_word();
            const auto ca = unpack(a).codes;
            const auto cb = unpack(b).codes;
            std::uint32_t l1 = 0, l2 = 0;
            for (std::size_t i = 0; i < ca.size(); ++i) {
                const auto delta =
                    static_cast<std::uint32_t>(std::abs(int(ca[i]) - int(cb[i])));
                l1 += delta;
                l2 += delta * delta;
            }
            expect(manhattan_packed(a, b) == l1, "packed L1 disagrees with oracle");
            expect(l2sq_packed(a, b) == (bits == 1 ? l1 : l2),
                   "packed L2 disagrees with oracle");
            expect(pack(unpack(a), false).words == a.words, "pack/unpack round trip failed");
        }
    }
    std::puts("[ok] packed distance kernels match unpacked oracle");

    // Scalar and vector kernel variants agree.
    if (cpu_supports_avx2()) {
        const auto& s = kernels::scalar_kernels();
        const auto& v = kernels::avx2_kernels();
        for (int rep = 0; rep < 2000; ++rep) {
            std::vector<std::uint16_t> a(17), b(17);
            for (auto& w : a) w = static_cast<std::uint16_t>(word(rng));
            for (auto& w : b) w = static_cast<std::uint16_t>(word(rng));
            expect(s.l1_2bit(a.data(), b.data(), a.size()) ==
                       v.l1_2bit(a.data(), b.data(), a.size()),
                   "scalar and avx2 L1 kernels disagree");
            expect(s.l2_2bit(a.data(), b.data(), a.size()) ==
                       v.l2_2bit(a.data(), b.data(), a.size()),
                   "scalar and avx2 L2 kernels disagree");
        }
        std::puts("[ok] scalar and avx2 kernels agree");
    } else {
        std::puts("[--] avx2 unavailable on this cpu; scalar kernels only");
    }

    // Sparse attention over the full index set reproduces dense attention.
    const std::size_t d = 64, s_len = 96;
    KvCache cache(d, 2);
    RealMatrix keys(s_len, d), values(s_len, d);
    for (std::size_t i = 0; i < s_len; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            keys(i, j) = normal(rng);
            values(i, j) = normal(rng);
        }
        const auto t = fwht(keys.row(i), {.dim = d});
        cache.update(keys.row(i), values.row(i), pack(bucketize(t, compute_thresholds(t, 2))));
    }
    RealVector q(d);
    for (auto& x : q) x = normal(rng);
    std::vector<std::size_t> all(s_len);
    std::iota(all.begin(), all.end(), std::size_t{0});
    const auto sparse = sparse_attention(q, cache, {all});
    const auto dense = full_attention(q, keys, values);
    for (std::size_t j = 0; j < d; ++j)
        expect(std::abs(sparse.out[j] - dense.out[j]) <= 1e-12,
               "sparse attention over all tokens diverges from dense");
    std::puts("[ok] sparse attention matches dense attention on the full set");

    // Cost tables sum to their closed forms.
    const CostParams params{.b = 2, .s = 4096, .h = 2048, .h_kv = 1024, .d = 128, .n = 4,
                            .p = 16, .k = 256};
    const auto check_flops = [](const CostReport& report) {
        expect(std::abs(report.total_flops - report.closed_form_flops) <=
                   1e-12 * report.closed_form_flops,
               "cost rows do not sum to the closed form (" + report.method + ")");
    };
    check_flops(flops_full(params));
    check_flops(flops_quest(params));
    check_flops(flops_adamas(params));
    std::puts("[ok] cost-model rows sum to closed-form totals");
}

int run(int argc, char** argv) {
    CLI::App app{"sparse-attention selection benchmark harness"};
    app.require_subcommand(1);

    std::string config_path, out_path, format = "csv";
    auto* sweep_cmd = app.add_subcommand("sweep", "run a selection-policy sweep");
    sweep_cmd->add_option("--config", config_path, "JSON config file")
        ->required()
        ->check(CLI::ExistingFile);
    sweep_cmd->add_option("--out", out_path, "output file")->required();
    sweep_cmd->add_option("--format", format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    std::string needle_config, needle_out;
    auto* needle_cmd =
        app.add_subcommand("needle", "summarize needle retrieval over a sweep");
    needle_cmd->add_option("--config", needle_config, "JSON config file")
        ->required()
        ->check(CLI::ExistingFile);
    needle_cmd->add_option("--out", needle_out, "output file")->required();

    std::string method;
    CostParams params;
    auto* cost_cmd = app.add_subcommand("cost", "evaluate the analytic cost model");
    // Long-only help so --h stays available for the hidden-dimension flag.
    cost_cmd->set_help_flag("--help", "print help");
    cost_cmd->add_option("--method", method, "full, quest, or adamas")->required();
    cost_cmd->add_option("--b", params.b, "batch size");
    cost_cmd->add_option("--s", params.s, "sequence length")->required();
    cost_cmd->add_option("--h", params.h, "hidden dim")->required();
    cost_cmd->add_option("--hkv", params.h_kv, "kv hidden dim")->required();
    cost_cmd->add_option("--d", params.d, "head dim")->required();
    cost_cmd->add_option("--n", params.n, "bucket levels");
    cost_cmd->add_option("--p", params.p, "page size");
    cost_cmd->add_option("--k", params.k, "selected tokens")->required();

    auto* selftest_cmd = app.add_subcommand("selftest", "run kernel oracle checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help lands here too; CLI11 returns 0 for it and nonzero for
        // genuine parse errors, which are config errors in our contract.
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    if (sweep_cmd->parsed()) {
        const HarnessConfig config = load_harness_config(config_path);
        const auto rows = run_sweep(config.workload, config.sweep);
        emit(rows, parse_emit_format(format), out_path);
        std::cout << "wrote " << rows.size() << " rows to " << out_path << "\n";
    } else if (needle_cmd->parsed()) {
        const HarnessConfig config = load_harness_config(needle_config);
        const auto rows = run_sweep(config.workload, config.sweep);
        const auto summary = needle_report(rows);
        std::ofstream os(needle_out, std::ios::binary);
        if (!os) throw std::runtime_error("cannot open " + needle_out);
        os << needle_summary_to_csv(summary);
        std::cout << "wrote " << summary.size() << " summary rows to " << needle_out << "\n";
    } else if (cost_cmd->parsed()) {
        CostReport flops, memory;
        switch (parse_cost_method(method)) {
            case CostMethod::full:
                flops = flops_full(params);
                memory = memory_full(params);
                break;
            case CostMethod::quest:
                flops = flops_quest(params);
                memory = memory_quest(params);
                break;
            case CostMethod::adamas:
                flops = flops_adamas(params);
                memory = memory_adamas(params);
                break;
        }
        std::cout << cost_report_to_json(flops, memory, params);
    } else if (selftest_cmd->parsed()) {
        run_selftest();
        std::puts("selftest passed");
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
