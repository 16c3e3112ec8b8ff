#include "adamas/attention.hpp"

#include <algorithm>
#include <cmath>

namespace adamas {

AttentionOutput full_attention(std::span<const double> q, const RealMatrix& keys,
                               const RealMatrix& values, bool want_weights) {
    if (keys.rows() == 0) throw ConfigError("full_attention: no keys to attend over");
    if (keys.rows() != values.rows() || keys.cols() != values.cols())
        throw ConfigError("full_attention: key/value shapes differ");
    if (q.size() != keys.cols()) throw ConfigError("full_attention: query length mismatch");

    const double scale = 1.0 / std::sqrt(static_cast<double>(q.size()));
    RealVector logits(keys.rows());
    for (std::size_t i = 0; i < keys.rows(); ++i) logits[i] = dot(q, keys.row(i)) * scale;

    const double peak = *std::max_element(logits.begin(), logits.end());
    double denom = 0.0;
    for (double& l : logits) {
        l = std::exp(l - peak);
        denom += l;
    }

    AttentionOutput result;
    result.out.assign(q.size(), 0.0);
    for (std::size_t i = 0; i < values.rows(); ++i) {
        const double w = logits[i] / denom;
        const auto v = values.row(i);
        for (std::size_t j = 0; j < v.size(); ++j) result.out[j] += w * v[j];
    }
    if (want_weights) {
        for (double& l : logits) l /= denom;
        result.weights = std::move(logits);
    }
    return result;
}

AttentionOutput sparse_attention(std::span<const double> q, const KvCache& cache,
                                 const SelectionResult& sel, bool want_weights) {
    if (sel.indices.empty()) throw ConfigError("sparse_attention: empty selection");
    auto [keys, values] = cache.gather(sel.indices);
    return full_attention(q, keys, values, want_weights);
}

double output_error(const AttentionOutput& approx, const AttentionOutput& exact) {
    if (approx.out.size() != exact.out.size())
        throw ConfigError("output_error: dimension mismatch");
    double diff = 0.0;
    for (std::size_t i = 0; i < exact.out.size(); ++i) {
        const double d = approx.out[i] - exact.out[i];
        diff += d * d;
    }
    const double ref = l2_norm(exact.out);
    return std::sqrt(diff) / std::max(ref, 1e-30);
}

}  // namespace adamas
