#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "adamas/attention.hpp"
#include "adamas/baselines.hpp"
#include "test_util.hpp"

using namespace adamas;

namespace {

// Independent reference: softmax in long double, summed serially.
RealVector attention_oracle(std::span<const double> q, const RealMatrix& keys,
                            const RealMatrix& values) {
    const std::size_t n = keys.rows(), d = keys.cols();
    const long double scale = 1.0L / std::sqrt(static_cast<long double>(q.size()));
    std::vector<long double> logits(n);
    long double max_logit = -std::numeric_limits<long double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        long double acc = 0.0L;
        for (std::size_t j = 0; j < d; ++j) acc += static_cast<long double>(q[j]) * keys(i, j);
        logits[i] = acc * scale;
        max_logit = std::max(max_logit, logits[i]);
    }
    long double z = 0.0L;
    for (auto& l : logits) {
        l = std::exp(l - max_logit);
        z += l;
    }
    RealVector out(values.cols(), 0.0);
    for (std::size_t j = 0; j < values.cols(); ++j) {
        long double acc = 0.0L;
        for (std::size_t i = 0; i < n; ++i) acc += logits[i] * values(i, j);
        out[j] = static_cast<double>(acc / z);
    }
    return out;
}

struct RandomProblem {
    RealVector q;
    RealMatrix keys;
    RealMatrix values;

    RandomProblem(std::size_t n, std::size_t d, std::uint64_t seed)
        : q(d), keys(n, d), values(n, d) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal;
        for (auto& x : q) x = normal(rng);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                keys(i, j) = normal(rng);
                values(i, j) = normal(rng);
            }
    }
};

KvCache cache_of(const RealMatrix& keys, const RealMatrix& values) {
    KvCache cache(keys.cols(), 2);
    const CodeVector dummy{.codes = std::vector<std::uint8_t>(keys.cols(), 0), .bits = 2};
    const auto packed = pack(dummy);
    for (std::size_t i = 0; i < keys.rows(); ++i)
        cache.update(keys.row(i), values.row(i), packed);
    return cache;
}

}  // namespace

TEST_CASE("a single token gets weight one") {
    RealMatrix keys(1, 3), values(1, 3);
    keys(0, 0) = 0.3;
    keys(0, 1) = -2.0;
    keys(0, 2) = 5.0;
    values(0, 0) = 1.5;
    values(0, 1) = -0.25;
    values(0, 2) = 1e6;
    const RealVector q{1.0, 2.0, 3.0};
    const auto out = full_attention(q, keys, values, true);
    for (std::size_t j = 0; j < 3; ++j) CHECK(out.out[j] == values(0, j));
    REQUIRE(out.weights.has_value());
    CHECK(out.weights->size() == 1);
    CHECK((*out.weights)[0] == 1.0);
}

TEST_CASE("identical keys average their values") {
    RealMatrix keys(2, 2), values(2, 2);
    keys(0, 0) = keys(1, 0) = 0.7;
    keys(0, 1) = keys(1, 1) = -1.2;
    values(0, 0) = 2.0;
    values(0, 1) = 4.0;
    values(1, 0) = 6.0;
    values(1, 1) = -2.0;
    const RealVector q{0.5, 0.5};
    const auto out = full_attention(q, keys, values);
    CHECK(out.out[0] == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(out.out[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("dense attention matches a long-double oracle") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        RandomProblem p(32, 8, seed);
        const auto out = full_attention(p.q, p.keys, p.values, true);
        const auto expected = attention_oracle(p.q, p.keys, p.values);
        for (std::size_t j = 0; j < 8; ++j)
            CHECK(std::abs(out.out[j] - expected[j]) <= 1e-10);

        // Weights form a distribution.
        REQUIRE(out.weights.has_value());
        double total = 0.0;
        for (double w : *out.weights) {
            CHECK(w >= 0.0);
            total += w;
        }
        CHECK(std::abs(total - 1.0) <= 1e-12);

        // Each output coordinate is a convex combination of value entries.
        for (std::size_t j = 0; j < 8; ++j) {
            double lo = p.values(0, j), hi = p.values(0, j);
            for (std::size_t i = 1; i < 32; ++i) {
                lo = std::min(lo, p.values(i, j));
                hi = std::max(hi, p.values(i, j));
            }
            CHECK(out.out[j] >= lo - 1e-12);
            CHECK(out.out[j] <= hi + 1e-12);
        }
    }
}

TEST_CASE("uniform logit shifts leave the output unchanged") {
    // Shifting every key by the same vector adds a constant to every logit,
    // which softmax cancels.
    RandomProblem p(24, 16, 123);
    std::mt19937_64 rng(456);
    std::normal_distribution<double> normal;
    RealVector shift(16);
    for (auto& x : shift) x = normal(rng);

    RealMatrix shifted = p.keys;
    for (std::size_t i = 0; i < 24; ++i)
        for (std::size_t j = 0; j < 16; ++j) shifted(i, j) += shift[j];

    const auto base = full_attention(p.q, p.keys, p.values);
    const auto moved = full_attention(p.q, shifted, p.values);
    for (std::size_t j = 0; j < 16; ++j)
        CHECK(std::abs(base.out[j] - moved.out[j]) <= 1e-12);
}

TEST_CASE("extreme logits stay finite") {
    RealMatrix keys(2, 2), values(2, 2);
    keys(0, 0) = 500.0;
    keys(1, 0) = -500.0;
    values(0, 0) = 1.0;
    values(1, 0) = 2.0;
    const RealVector q{10.0, 0.0};
    const auto out = full_attention(q, keys, values);
    // The +500 key takes all the mass; no overflow or NaN.
    CHECK(out.out[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::isfinite(out.out[1]));
}

TEST_CASE("sparse attention over the full set reproduces dense attention") {
    RandomProblem p(48, 16, 9);
    const auto cache = cache_of(p.keys, p.values);
    std::vector<std::size_t> all(48);
    std::iota(all.begin(), all.end(), std::size_t{0});
    const auto sparse = sparse_attention(p.q, cache, {all});
    const auto dense = full_attention(p.q, p.keys, p.values);
    CHECK(sparse.out == dense.out);  // identical arithmetic, bit-for-bit
}

TEST_CASE("sparse attention with one token returns its value row") {
    RandomProblem p(16, 8, 11);
    const auto cache = cache_of(p.keys, p.values);
    const auto out = sparse_attention(p.q, cache, {{5}});
    for (std::size_t j = 0; j < 8; ++j) CHECK(out.out[j] == p.values(5, j));
}

TEST_CASE("sparse attention equals dense attention on the gathered subset") {
    std::mt19937_64 rng(31);
    RandomProblem p(64, 16, 13);
    const auto cache = cache_of(p.keys, p.values);
    for (int rep = 0; rep < 1000; ++rep) {
        std::vector<std::size_t> all(64);
        std::iota(all.begin(), all.end(), std::size_t{0});
        std::shuffle(all.begin(), all.end(), rng);
        const std::size_t m = 1 + rng() % 63;
        std::vector<std::size_t> subset(all.begin(), all.begin() + m);
        std::sort(subset.begin(), subset.end());

        // Independently built submatrices, then the long-double oracle.
        RealMatrix sub_k(m, 16), sub_v(m, 16);
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t j = 0; j < 16; ++j) {
                sub_k(r, j) = p.keys(subset[r], j);
                sub_v(r, j) = p.values(subset[r], j);
            }
        const auto sparse = sparse_attention(p.q, cache, {subset});
        const auto expected = attention_oracle(p.q, sub_k, sub_v);
        for (std::size_t j = 0; j < 16; ++j)
            REQUIRE(std::abs(sparse.out[j] - expected[j]) <= 1e-12);
    }
}

TEST_CASE("attention input validation") {
    RealMatrix keys(0, 4), values(0, 4);
    const RealVector q{1.0, 2.0, 3.0, 4.0};
    CHECK_THROWS_AS(full_attention(q, keys, values), ConfigError);

    RandomProblem p(8, 4, 17);
    CHECK_THROWS_AS(full_attention(RealVector{1.0, 2.0}, p.keys, p.values), ConfigError);
    CHECK_THROWS_AS(full_attention(p.q, p.keys, RealMatrix(7, 4)), ConfigError);
    CHECK_THROWS_AS(full_attention(p.q, p.keys, RealMatrix(8, 2)), ConfigError);

    const auto cache = cache_of(p.keys, p.values);
    CHECK_THROWS_AS(sparse_attention(p.q, cache, {{}}), ConfigError);  // empty selection
    CHECK_THROWS_AS(sparse_attention(p.q, cache, {{8}}), ConfigError);
}

TEST_CASE("output_error is the relative L2 deviation") {
    AttentionOutput exact{.out = {3.0, 4.0}, .weights = std::nullopt};  // norm 5
    CHECK(output_error(exact, exact) == 0.0);

    AttentionOutput doubled{.out = {6.0, 8.0}, .weights = std::nullopt};
    CHECK(output_error(doubled, exact) == doctest::Approx(1.0).epsilon(1e-15));

    AttentionOutput offset{.out = {3.0, 4.0 + 5.0}, .weights = std::nullopt};
    CHECK(output_error(offset, exact) == doctest::Approx(1.0).epsilon(1e-15));

    // Zero exact output: the epsilon guard keeps the ratio finite (and zero
    // when the approximation is also zero).
    AttentionOutput zero{.out = {0.0, 0.0}, .weights = std::nullopt};
    CHECK(output_error(zero, zero) == 0.0);
    CHECK(std::isfinite(output_error(zero, exact)));
}

TEST_CASE("mean output error shrinks as the oracle budget grows") {
    // With exact top-k selection, attending to more of the best tokens can
    // only bring the output closer to dense attention on average.
    const std::size_t n = 1024, d = 64;
    const std::vector<std::size_t> budgets{16, 64, 256, 1024};
    std::vector<double> mean_error(budgets.size(), 0.0);
    const int seeds = 100;

    for (int seed = 0; seed < seeds; ++seed) {
        RandomProblem p(n, d, 1000 + static_cast<std::uint64_t>(seed));
        const auto cache = cache_of(p.keys, p.values);
        const auto exact = full_attention(p.q, p.keys, p.values);
        for (std::size_t bi = 0; bi < budgets.size(); ++bi) {
            const auto sel = oracle_select(p.q, cache, budgets[bi]);
            const auto approx = sparse_attention(p.q, cache, sel);
            mean_error[bi] += output_error(approx, exact) / seeds;
        }
    }

    for (std::size_t bi = 1; bi < budgets.size(); ++bi)
        CHECK(mean_error[bi] <= mean_error[bi - 1] + 1e-12);
    CHECK(mean_error.back() <= 1e-12);  // full budget is exact
    CHECK(mean_error.front() > 0.01);   // tiny budgets genuinely approximate
}
