#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include "adamas/quantizer.hpp"
#include "test_util.hpp"

using namespace adamas;
using adamas::testing::random_normal_vector;

TEST_CASE("thresholds are RMS-scaled standard normal quantiles") {
    SUBCASE("unit RMS gives the bare quartiles") {
        const RealVector x{1.0, -1.0, 1.0, -1.0};  // RMS exactly 1
        const auto t = compute_thresholds(x, 2);
        REQUIRE(t.values.size() == 3);
        CHECK(t.values[0] == doctest::Approx(-0.6745).epsilon(1e-4));
        CHECK(t.values[1] == 0.0);
        CHECK(t.values[2] == doctest::Approx(0.6745).epsilon(1e-4));
    }
    SUBCASE("sign split is scale-free") {
        const RealVector x{2.0, -2.0};  // RMS exactly 2
        const auto t = compute_thresholds(x, 1);
        REQUIRE(t.values.size() == 1);
        CHECK(t.values[0] == 0.0);
    }
    SUBCASE("three-bit thresholds are the octile quantiles") {
        const RealVector x{3.0, -3.0};  // RMS exactly 3
        const auto t = compute_thresholds(x, 3);
        REQUIRE(t.values.size() == 7);
        const std::array<double, 7> expected{-1.15035, -0.67449, -0.31864, 0.0,
                                             0.31864,  0.67449,  1.15035};
        for (std::size_t i = 0; i < 7; ++i)
            CHECK(t.values[i] == doctest::Approx(3.0 * expected[i]).epsilon(1e-4));
        for (std::size_t i = 0; i + 1 < 7; ++i) CHECK(t.values[i] < t.values[i + 1]);
    }
    SUBCASE("thresholds scale linearly with RMS") {
        std::mt19937_64 rng(23);
        const auto x = random_normal_vector(rng, 128);
        RealVector x2(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) x2[i] = 2.0 * x[i];
        const auto t1 = compute_thresholds(x, 2);
        const auto t2 = compute_thresholds(x2, 2);
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(t2.values[i] == doctest::Approx(2.0 * t1.values[i]));
    }
}

TEST_CASE("threshold computation rejects degenerate input") {
    CHECK_THROWS_AS((void)compute_thresholds(RealVector{}, 2), ConfigError);
    CHECK_THROWS_AS((void)compute_thresholds(RealVector{0.0, 0.0, 0.0}, 2), ConfigError);
    CHECK_THROWS_AS(
        (void)compute_thresholds(RealVector{1.0, std::numeric_limits<double>::infinity()}, 2),
        ConfigError);
    CHECK_THROWS_AS((void)compute_thresholds(RealVector{1.0}, 0), ConfigError);
    CHECK_THROWS_AS((void)compute_thresholds(RealVector{1.0}, 4), ConfigError);
    CHECK_THROWS_AS((void)fixed_thresholds(2, RealVector{0.5, 0.0, -0.5}), ConfigError);
    CHECK_THROWS_AS((void)fixed_thresholds(2, RealVector{0.0, 1.0}), ConfigError);
}

TEST_CASE("bucketize counts thresholds strictly below each value") {
    const auto t = fixed_thresholds(2, RealVector{-0.6745, 0.0, 0.6745});
    SUBCASE("one value per bucket") {
        const auto c = bucketize(RealVector{-1.0, -0.3, 0.3, 1.0}, t);
        CHECK(c.codes == std::vector<std::uint8_t>{0, 1, 2, 3});
        CHECK(c.bits == 2);
    }
    SUBCASE("a value equal to a threshold lands in the lower bucket") {
        CHECK(bucketize(RealVector{0.6745}, t).codes == std::vector<std::uint8_t>{2});
        CHECK(bucketize(RealVector{0.0}, t).codes == std::vector<std::uint8_t>{1});
        CHECK(bucketize(RealVector{-0.6745}, t).codes == std::vector<std::uint8_t>{0});
    }
    SUBCASE("order of values is preserved as order of codes") {
        std::mt19937_64 rng(29);
        const auto x = random_normal_vector(rng, 256);
        const auto c = bucketize(x, compute_thresholds(x, 2));
        for (std::size_t i = 0; i < x.size(); ++i)
            for (std::size_t j = 0; j < x.size(); ++j)
                if (x[i] <= x[j]) CHECK(c.codes[i] <= c.codes[j]);
    }
}

TEST_CASE("quantile thresholds give near-equiprobable buckets on Gaussian data") {
    SUBCASE("small sample") {
        std::mt19937_64 rng(31);
        const auto x = random_normal_vector(rng, 100);
        const auto c = bucketize(x, compute_thresholds(x, 2));
        std::array<int, 4> histogram{};
        for (auto code : c.codes) ++histogram[code];
        for (int count : histogram) {
            CHECK(count >= 10);
            CHECK(count <= 40);
        }
    }
    SUBCASE("large sample") {
        std::mt19937_64 rng(37);
        const auto x = random_normal_vector(rng, 100000);
        const auto c = bucketize(x, compute_thresholds(x, 2));
        std::array<int, 4> histogram{};
        for (auto code : c.codes) ++histogram[code];
        for (int count : histogram) {
            // 25000 expected; 4.3 sigma of multinomial noise is ~1860.
            CHECK(count >= 23000);
            CHECK(count <= 27000);
        }
    }
}

TEST_CASE("bucketization is invariant under positive rescaling") {
    std::mt19937_64 rng(41);
    const auto x = random_normal_vector(rng, 256);
    for (int bits : {1, 2, 3}) {
        const auto base = bucketize(x, compute_thresholds(x, bits));
        for (double alpha : {0.25, 2.0, 3.0, 1024.0}) {
            RealVector scaled(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) scaled[i] = alpha * x[i];
            const auto c = bucketize(scaled, compute_thresholds(scaled, bits));
            CHECK(c.codes == base.codes);
        }
    }
}

TEST_CASE("pack lays codes out little-endian within each word") {
    CodeVector c{.codes = {3, 2, 1, 0, 0, 1, 2, 3}, .bits = 2};
    const auto p = pack(c);
    REQUIRE(p.words.size() == 1);
    CHECK(p.words[0] == 58395);
    CHECK(p.len == 8);
    CHECK(p.bits == 2);

    CHECK(pack(CodeVector{.codes = std::vector<std::uint8_t>(8, 0), .bits = 2}).words[0] == 0);
    CHECK(pack(CodeVector{.codes = std::vector<std::uint8_t>(8, 3), .bits = 2}).words[0] == 65535);
    CHECK(pack(CodeVector{.codes = std::vector<std::uint8_t>(16, 1), .bits = 1}).words[0] == 65535);
    CodeVector alt{.codes = {}, .bits = 1};
    for (int i = 0; i < 16; ++i) alt.codes.push_back(i % 2 == 0 ? 1 : 0);
    CHECK(pack(alt).words[0] == 0x5555);
}

TEST_CASE("unpack inverts pack") {
    PackedCodes p{.words = {58395}, .len = 8, .bits = 2};
    CHECK(unpack(p).codes == std::vector<std::uint8_t>{3, 2, 1, 0, 0, 1, 2, 3});
    CHECK(unpack(PackedCodes{.words = {0}, .len = 8, .bits = 2}).codes ==
          std::vector<std::uint8_t>(8, 0));

    std::mt19937_64 rng(43);
    for (int bits : {1, 2}) {
        std::uniform_int_distribution<int> code(0, (1 << bits) - 1);
        std::uniform_int_distribution<std::size_t> length(1, 160);
        for (int rep = 0; rep < 10000; ++rep) {
            CodeVector c{.codes = {}, .bits = bits};
            const std::size_t n = length(rng);
            for (std::size_t i = 0; i < n; ++i)
                c.codes.push_back(static_cast<std::uint8_t>(code(rng)));
            const auto round = unpack(pack(c));
            REQUIRE(round.codes.size() >= n);
            for (std::size_t i = 0; i < n; ++i) CHECK(round.codes[i] == c.codes[i]);
            for (std::size_t i = n; i < round.codes.size(); ++i) CHECK(round.codes[i] == 0);
        }
    }
}

TEST_CASE("every 16-bit word survives an unpack/pack round trip") {
    for (int bits : {1, 2}) {
        for (std::uint32_t w = 0; w <= 0xFFFF; ++w) {
            PackedCodes p{.words = {static_cast<std::uint16_t>(w)},
                          .len = 16u / static_cast<unsigned>(bits),
                          .bits = bits};
            const auto repacked = pack(unpack(p), /*pad=*/false);
            REQUIRE(repacked.words.size() == 1);
            CHECK(repacked.words[0] == w);
        }
    }
}

TEST_CASE("pack validates width, range, and length") {
    CHECK_THROWS_AS((void)pack(CodeVector{.codes = {1, 2, 3}, .bits = 3}), ConfigError);
    CHECK_THROWS_AS((void)pack(CodeVector{.codes = {4}, .bits = 2}), ConfigError);
    CHECK_THROWS_AS((void)pack(CodeVector{.codes = {1, 1, 1}, .bits = 2}, /*pad=*/false),
                    ConfigError);
    // Padded packing rounds the length up to a full word.
    const auto p = pack(CodeVector{.codes = {1, 1, 1}, .bits = 2});
    CHECK(p.len == 8);
    CHECK(p.words.size() == 1);
    CHECK(p.words[0] == (1u | (1u << 2) | (1u << 4)));
}

TEST_CASE("packed codes cost one sixteenth of 16-bit key/value storage") {
    const std::size_t d = 128;
    const std::size_t code_bytes = packed_bytes(d, 2);
    const std::size_t key_bytes_fp16 = d * 2;
    CHECK(code_bytes == 32);
    CHECK(code_bytes == key_bytes_fp16 / 8);
    CHECK(code_bytes == 2 * key_bytes_fp16 / 16);
    CHECK(packed_bytes(d, 1) == 16);
    CHECK(packed_bytes(d, 3) == d);
    CHECK(packed_bytes(12, 2) == 4);  // rounds up to two words
}
