#include "adamas/quantizer.hpp"

#include <algorithm>
#include <cmath>

namespace adamas {

namespace {

// Standard normal quantiles Phi^-1(i/8) for i = 1..3 (the rest follow by
// symmetry). Phi^-1(2/8) is the quartile used by the 2-bit rule.
constexpr double kQ18 = 1.1503493803760081783;
constexpr double kQ28 = 0.6744897501960817432;
constexpr double kQ38 = 0.31863936396437516302;

void check_bits(int bits) {
    if (bits < 1 || bits > 3) {
        throw ConfigError("bucketization width must be 1, 2, or 3 bits, got " +
                          std::to_string(bits));
    }
}

}  // namespace

void BucketThresholds::validate() const {
    check_bits(bits);
    const std::size_t expected = (std::size_t{1} << bits) - 1;
    if (values.size() != expected) {
        throw ConfigError("expected " + std::to_string(expected) + " thresholds for " +
                          std::to_string(bits) + "-bit codes, got " +
                          std::to_string(values.size()));
    }
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        if (!(values[i] < values[i + 1])) {
            throw ConfigError("thresholds must be strictly increasing");
        }
    }
}

BucketThresholds compute_thresholds(std::span<const double> x, int bits) {
    check_bits(bits);
    if (x.empty()) throw ConfigError("cannot compute thresholds of an empty vector");
    double sumsq = 0.0;
    for (double v : x) sumsq += v * v;
    const double sigma = std::sqrt(sumsq / double(x.size()));
    if (!std::isfinite(sigma)) throw ConfigError("non-finite input to compute_thresholds");
    if (sigma == 0.0) throw ConfigError("degenerate scale: input vector is all zeros");

    BucketThresholds t;
    t.bits = bits;
    switch (bits) {
        case 1:
            t.values = {0.0};
            break;
        case 2:
            t.values = {-kQ28 * sigma, 0.0, kQ28 * sigma};
            break;
        case 3:
            t.values = {-kQ18 * sigma, -kQ28 * sigma, -kQ38 * sigma, 0.0,
                        kQ38 * sigma,  kQ28 * sigma,  kQ18 * sigma};
            break;
    }
    return t;
}

BucketThresholds fixed_thresholds(int bits, std::span<const double> values) {
    BucketThresholds t;
    t.bits = bits;
    t.values.assign(values.begin(), values.end());
    t.validate();
    return t;
}

CodeVector bucketize(std::span<const double> x, const BucketThresholds& t) {
    t.validate();
    CodeVector out;
    out.bits = t.bits;
    out.codes.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::uint8_t level = 0;
        for (double b : t.values) level += x[i] > b ? 1 : 0;
        out.codes[i] = level;
    }
    return out;
}

PackedCodes pack(const CodeVector& c, bool pad) {
    if (c.bits != 1 && c.bits != 2) {
        throw ConfigError("only 1- and 2-bit codes pack into 16-bit words; got " +
                          std::to_string(c.bits) + "-bit");
    }
    const std::size_t per_word = 16u / static_cast<unsigned>(c.bits);
    std::size_t n = c.codes.size();
    if (n % per_word != 0) {
        if (!pad) {
            throw ConfigError("code length " + std::to_string(n) +
                              " is not a multiple of " + std::to_string(per_word));
        }
        n = (n / per_word + 1) * per_word;
    }

    PackedCodes p;
    p.bits = c.bits;
    p.len = n;
    p.words.assign(n / per_word, 0);
    const unsigned max_code = 1u << c.bits;
    for (std::size_t i = 0; i < c.codes.size(); ++i) {
        const unsigned code = c.codes[i];
        if (code >= max_code) {
            throw ConfigError("code value " + std::to_string(code) + " out of range for " +
                              std::to_string(c.bits) + "-bit packing");
        }
        p.words[i / per_word] |=
            static_cast<std::uint16_t>(code << (c.bits * (i % per_word)));
    }
    return p;
}

CodeVector unpack(const PackedCodes& p) {
    const std::size_t per_word = p.codes_per_word();
    const unsigned mask = (1u << p.bits) - 1u;
    CodeVector c;
    c.bits = p.bits;
    c.codes.resize(p.words.size() * per_word);
    for (std::size_t i = 0; i < c.codes.size(); ++i) {
        c.codes[i] = static_cast<std::uint8_t>(
            (p.words[i / per_word] >> (p.bits * (i % per_word))) & mask);
    }
    return c;
}

std::size_t packed_bytes(std::size_t d, int bits) {
    check_bits(bits);
    if (bits == 3) return d;  // stored unpacked, one byte per element
    const std::size_t per_word = 16u / static_cast<unsigned>(bits);
    const std::size_t nwords = (d + per_word - 1) / per_word;
    return nwords * sizeof(std::uint16_t);
}

}  // namespace adamas
