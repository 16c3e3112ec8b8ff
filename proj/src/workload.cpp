#include "adamas/workload.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace adamas {

namespace {

// Substream tags; instance streams start above the fixed block.
constexpr std::uint64_t kStreamKeys = 1;
constexpr std::uint64_t kStreamValues = 2;
constexpr std::uint64_t kStreamQuery = 3;
constexpr std::uint64_t kStreamNeedleNoise = 4;
constexpr std::uint64_t kStreamChannels = 5;
constexpr std::uint64_t kStreamInstanceBase = 1000;

std::shared_ptr<RealMatrix> sample_matrix(std::uint64_t seed, std::size_t rows,
                                          std::size_t cols) {
    auto m = std::make_shared<RealMatrix>(rows, cols);
    NormalSampler sampler(seed);
    sampler.fill(m->data());
    return m;
}

void amplify_channels(std::span<double> v, const std::vector<std::size_t>& channels,
                      double scale) {
    for (std::size_t c : channels) v[c] *= scale;
}

}  // namespace

double NormalSampler::next() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    // Top 53 bits as uniforms; u1 shifted into (0, 1] so the log is finite.
    const double u1 = double((rng_() >> 11) + 1) * 0x1.0p-53;
    const double u2 = double(rng_() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
}

void NormalSampler::fill(std::span<double> out, double sigma) {
    for (double& x : out) x = sigma * next();
}

DistributionKind parse_distribution(const std::string& name) {
    if (name == "gaussian") return DistributionKind::gaussian;
    if (name == "gaussian_with_outliers") return DistributionKind::gaussian_with_outliers;
    if (name == "planted_needle") return DistributionKind::planted_needle;
    throw ConfigError("unknown distribution: " + name);
}

const char* distribution_name(DistributionKind kind) {
    switch (kind) {
        case DistributionKind::gaussian: return "gaussian";
        case DistributionKind::gaussian_with_outliers: return "gaussian_with_outliers";
        case DistributionKind::planted_needle: return "planted_needle";
    }
    return "?";
}

void WorkloadSpec::validate() const {
    if (seq_len < 1) throw ConfigError("workload: seq_len must be at least 1");
    if (!is_power_of_two(head_dim) || head_dim < 2)
        throw ConfigError("workload: head_dim must be a power of two >= 2");
    if (num_queries < 1) throw ConfigError("workload: num_queries must be at least 1");
    if (distribution == DistributionKind::gaussian_with_outliers) {
        if (outlier_frac < 0.0 || outlier_frac > 1.0)
            throw ConfigError("workload: outlier_frac must lie in [0, 1]");
        if (outlier_scale <= 0.0) throw ConfigError("workload: outlier_scale must be positive");
    }
    if (distribution == DistributionKind::planted_needle) {
        if (position >= seq_len) throw ConfigError("workload: needle position out of range");
        if (snr <= 0.0) throw ConfigError("workload: snr must be positive");
    }
}

Workload::Workload(const WorkloadSpec& spec) : spec_(spec) {
    spec_.validate();
    if (spec_.distribution == DistributionKind::gaussian_with_outliers) {
        const auto count =
            static_cast<std::size_t>(std::ceil(spec_.outlier_frac * double(spec_.head_dim)));
        std::vector<std::size_t> channels(spec_.head_dim);
        std::iota(channels.begin(), channels.end(), std::size_t{0});
        std::mt19937_64 rng(derive_seed(spec_.seed, kStreamChannels));
        std::shuffle(channels.begin(), channels.end(), rng);
        channels.resize(std::min(count, channels.size()));
        std::sort(channels.begin(), channels.end());
        outlier_channels_ = std::move(channels);
    }
    if (spec_.distribution != DistributionKind::planted_needle) {
        auto keys = sample_matrix(derive_seed(spec_.seed, kStreamKeys), spec_.seq_len,
                                  spec_.head_dim);
        for (std::size_t i = 0; i < keys->rows(); ++i)
            amplify_channels(keys->row(i), outlier_channels_, spec_.outlier_scale);
        shared_keys_ = std::move(keys);
        shared_values_ = sample_matrix(derive_seed(spec_.seed, kStreamValues), spec_.seq_len,
                                       spec_.head_dim);
    }
}

std::uint64_t Workload::instance_seed(std::size_t query_index) const {
    if (query_index >= spec_.num_queries)
        throw ConfigError("workload: query index out of range");
    return derive_seed(spec_.seed, kStreamInstanceBase + query_index);
}

RealVector Workload::make_query(std::uint64_t inst_seed) const {
    RealVector q(spec_.head_dim);
    NormalSampler sampler(derive_seed(inst_seed, kStreamQuery));
    sampler.fill(q);
    amplify_channels(q, outlier_channels_, spec_.outlier_scale);
    return q;
}

WorkloadInstance Workload::instance(std::size_t query_index) const {
    WorkloadInstance inst;
    inst.seed = instance_seed(query_index);
    inst.query = make_query(inst.seed);

    if (spec_.distribution != DistributionKind::planted_needle) {
        inst.keys = shared_keys_;
        inst.values = shared_values_;
        return inst;
    }

    // Fresh key/value tensors per query: the needle key is built from this
    // query's direction, scaled to snr times a typical key norm (sqrt(d) for
    // unit Gaussian keys), plus unit Gaussian noise.
    auto keys = sample_matrix(derive_seed(inst.seed, kStreamKeys), spec_.seq_len,
                              spec_.head_dim);
    const double qnorm = l2_norm(inst.query);
    if (qnorm == 0.0) throw ConfigError("workload: degenerate zero query");
    const double gain = spec_.snr * std::sqrt(double(spec_.head_dim)) / qnorm;
    auto needle = keys->row(spec_.position);
    NormalSampler noise(derive_seed(inst.seed, kStreamNeedleNoise));
    for (std::size_t j = 0; j < spec_.head_dim; ++j)
        needle[j] = gain * inst.query[j] + noise.next();

    inst.keys = std::move(keys);
    inst.values = sample_matrix(derive_seed(inst.seed, kStreamValues), spec_.seq_len,
                                spec_.head_dim);
    inst.needle_position = spec_.position;
    return inst;
}

std::tuple<RealMatrix, RealMatrix, RealMatrix> generate_workload(const WorkloadSpec& spec) {
    Workload workload(spec);
    RealMatrix queries(spec.num_queries, spec.head_dim);
    RealMatrix keys, values;
    for (std::size_t qi = 0; qi < spec.num_queries; ++qi) {
        const WorkloadInstance inst = workload.instance(qi);
        std::copy(inst.query.begin(), inst.query.end(), queries.row(qi).begin());
        if (qi == 0) {
            keys = *inst.keys;
            values = *inst.values;
        }
    }
    return {std::move(queries), std::move(keys), std::move(values)};
}

}  // namespace adamas
