#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <tuple>

#include "adamas/common.hpp"

namespace adamas {

// splitmix64 step: the stream-splitting primitive behind all seed derivation.
// Fixed algorithm so documented seeds reproduce anywhere.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Decorrelated seed for substream `stream` of a base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t state = base;
    (void)splitmix64(state);
    state ^= 0x9E3779B97F4A7C15ULL * (stream + 1);
    return splitmix64(state);
}

// Standard normal sampler: Box-Muller over mt19937_64, uniforms taken as the
// top 53 bits. Fixed construction, independent of library distribution
// internals.
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : rng_(seed) {}

    double next();
    void fill(std::span<double> out, double sigma = 1.0);

private:
    std::mt19937_64 rng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

enum class DistributionKind {
    gaussian,                // i.i.d. standard normal Q, K, V
    gaussian_with_outliers,  // a few fixed channels scaled up in keys and queries
    planted_needle,          // one key per query aligned with that query
};

DistributionKind parse_distribution(const std::string& name);
const char* distribution_name(DistributionKind kind);

struct WorkloadSpec {
    std::uint64_t seed = 0;
    std::size_t seq_len = 1;
    std::size_t head_dim = 64;  // power of two
    std::size_t num_queries = 1;
    DistributionKind distribution = DistributionKind::gaussian;
    double outlier_frac = 0.01;   // gaussian_with_outliers: fraction of channels
    double outlier_scale = 10.0;  // gaussian_with_outliers: per-channel gain
    std::size_t position = 0;     // planted_needle: needle index, < seq_len
    double snr = 10.0;            // planted_needle: needle gain over a typical key

    void validate() const;
};

// One query's view of the workload. Gaussian-family instances share their
// key/value matrices across queries (same pointer); planted-needle instances
// own per-query matrices, since the needle key is built from the query.
struct WorkloadInstance {
    std::uint64_t seed = 0;  // per-query derived seed, reported in result rows
    RealVector query;
    std::shared_ptr<const RealMatrix> keys;
    std::shared_ptr<const RealMatrix> values;
    std::optional<std::size_t> needle_position;
};

class Workload {
public:
    explicit Workload(const WorkloadSpec& spec);

    const WorkloadSpec& spec() const { return spec_; }
    std::size_t num_queries() const { return spec_.num_queries; }
    std::uint64_t instance_seed(std::size_t query_index) const;
    WorkloadInstance instance(std::size_t query_index) const;

    // Channels the outlier variant amplifies (empty otherwise); fixed per
    // workload so the distortion is feature-aligned across tokens & queries.
    const std::vector<std::size_t>& outlier_channels() const { return outlier_channels_; }

private:
    WorkloadSpec spec_;
    std::vector<std::size_t> outlier_channels_;
    std::shared_ptr<const RealMatrix> shared_keys_;    // gaussian family only
    std::shared_ptr<const RealMatrix> shared_values_;

    RealVector make_query(std::uint64_t inst_seed) const;
};

// Batch view (Q stacks all queries). For planted_needle the returned K/V are
// those of the first query's instance; per-query needles require instance().
std::tuple<RealMatrix, RealMatrix, RealMatrix> generate_workload(const WorkloadSpec& spec);

}  // namespace adamas
