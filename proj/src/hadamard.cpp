#include "adamas/hadamard.hpp"

#include <algorithm>
#include <cmath>

#include "adamas/kernels.hpp"

namespace adamas {

void HadamardSpec::validate() const {
    if (dim < 2 || !is_power_of_two(dim)) {
        throw ConfigError("Hadamard dimension must be a power of two >= 2, got " +
                          std::to_string(dim));
    }
}

namespace {

void check_input(std::span<const double> x, const HadamardSpec& spec) {
    spec.validate();
    if (x.size() != spec.dim) {
        throw ConfigError("fwht input length " + std::to_string(x.size()) +
                          " does not match transform dimension " + std::to_string(spec.dim));
    }
}

}  // namespace

void fwht_inplace(std::span<double> x, const HadamardSpec& spec) {
    check_input(x, spec);
    kernels::active_kernels().fwht(x.data(), x.size(), spec.normalized);
}

RealVector fwht(std::span<const double> x, const HadamardSpec& spec) {
    check_input(x, spec);
    RealVector out(x.begin(), x.end());
    kernels::active_kernels().fwht(out.data(), out.size(), spec.normalized);
    return out;
}

RealVector fwht_counting(std::span<const double> x, const HadamardSpec& spec,
                         std::size_t& add_sub_ops) {
    check_input(x, spec);
    RealVector out(x.begin(), x.end());
    add_sub_ops = 0;
    const double scale = spec.normalized ? 0.70710678118654752440 : 1.0;
    const std::size_t n = out.size();
    for (std::size_t h = 1; h < n; h <<= 1) {
        for (std::size_t i = 0; i < n; i += 2 * h) {
            for (std::size_t j = i; j < i + h; ++j) {
                const double a = out[j];
                const double b = out[j + h];
                out[j] = (a + b) * scale;
                out[j + h] = (a - b) * scale;
                add_sub_ops += 2;
            }
        }
    }
    return out;
}

RealMatrix hadamard_matrix(const HadamardSpec& spec) {
    spec.validate();
    const std::size_t d = spec.dim;
    RealMatrix h(d, d);
    h(0, 0) = 1.0;
    // Kronecker doubling: H_{2n} = [[H_n, H_n], [H_n, -H_n]].
    for (std::size_t n = 1; n < d; n <<= 1) {
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < n; ++c) {
                const double v = h(r, c);
                h(r, c + n) = v;
                h(r + n, c) = v;
                h(r + n, c + n) = -v;
            }
        }
    }
    if (spec.normalized) {
        const double scale = std::exp2(-0.5 * double(log2_exact(d)));
        for (double& v : h.data()) v *= scale;
    }
    return h;
}

}  // namespace adamas
