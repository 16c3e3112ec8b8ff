#include "adamas/kv_cache.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace adamas {

namespace {

constexpr char kMagic[4] = {'A', 'D', 'K', 'V'};
constexpr std::uint32_t kSnapshotVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "snapshot IO assumes a little-endian host");

template <typename T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}

}  // namespace

KvCache::KvCache(std::size_t head_dim, int bits) : head_dim_(head_dim), bits_(bits) {
    if (head_dim == 0) throw ConfigError("KvCache: head_dim must be positive");
    if (bits < 1 || bits > 3) throw ConfigError("KvCache: bits must be 1, 2, or 3");
    if (bits == 3) {
        words_per_code_ = 0;
    } else {
        const std::size_t per_word = 16u / static_cast<unsigned>(bits);
        words_per_code_ = (head_dim + per_word - 1) / per_word;
    }
}

template <typename T>
void KvCache::append_row(std::vector<std::vector<T>>& chunks, const T* src,
                         std::size_t stride) {
    if (seq_len_ % kChunkRows == 0) {
        chunks.emplace_back();
        // Fully reserved up front and never resized past this, so the chunk's
        // buffer — and every span into it — stays put for the cache lifetime.
        chunks.back().reserve(kChunkRows * stride);
    }
    chunks.back().insert(chunks.back().end(), src, src + stride);
}

void KvCache::append_kv(std::span<const double> key, std::span<const double> value) {
    if (key.size() != head_dim_ || value.size() != head_dim_)
        throw ConfigError("KvCache: key/value length does not match head_dim");
    append_row(key_chunks_, key.data(), head_dim_);
    append_row(value_chunks_, value.data(), head_dim_);
}

std::size_t KvCache::update(std::span<const double> key, std::span<const double> value,
                            const PackedCodes& code) {
    if (bits_ == 3) throw ConfigError("KvCache: 3-bit cache expects byte codes");
    if (code.bits != bits_) throw ConfigError("KvCache: code width does not match cache");
    if (code.words.size() != words_per_code_)
        throw ConfigError("KvCache: code length does not match head_dim");
    append_kv(key, value);
    append_row(word_chunks_, code.words.data(), words_per_code_);
    return ++seq_len_;
}

std::size_t KvCache::update(std::span<const double> key, std::span<const double> value,
                            const CodeVector& code) {
    if (bits_ != 3) throw ConfigError("KvCache: packed cache expects packed codes");
    if (code.bits != bits_) throw ConfigError("KvCache: code width does not match cache");
    if (code.codes.size() != head_dim_)
        throw ConfigError("KvCache: code length does not match head_dim");
    append_kv(key, value);
    append_row(byte_chunks_, code.codes.data(), head_dim_);
    return ++seq_len_;
}

std::pair<RealMatrix, RealMatrix> KvCache::gather(std::span<const std::size_t> indices) const {
    RealMatrix keys(indices.size(), head_dim_);
    RealMatrix values(indices.size(), head_dim_);
    std::size_t prev = 0;
    for (std::size_t r = 0; r < indices.size(); ++r) {
        const std::size_t i = indices[r];
        if (i >= seq_len_) throw ConfigError("KvCache: gather index out of range");
        if (r > 0 && i <= prev) throw ConfigError("KvCache: gather indices must be increasing");
        prev = i;
        const auto k = key_row(i);
        const auto v = value_row(i);
        std::copy(k.begin(), k.end(), keys.row(r).begin());
        std::copy(v.begin(), v.end(), values.row(r).begin());
    }
    return {std::move(keys), std::move(values)};
}

std::size_t KvCache::packed_code_bytes() const {
    if (bits_ == 3) return seq_len_ * head_dim_;
    return seq_len_ * words_per_code_ * sizeof(std::uint16_t);
}

std::size_t KvCache::kv_bytes_fp16() const {
    // Keys and values both held as 16-bit scalars in the deployment layout.
    return 2 * seq_len_ * head_dim_ * 2;
}

void save_snapshot(const KvCache& cache, const std::filesystem::path& path) {
    if (cache.bits() == 3)
        throw ConfigError("save_snapshot: only packed 1/2-bit caches snapshot");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_snapshot: cannot open " + path.string());
    os.write(kMagic, 4);
    write_pod(os, kSnapshotVersion);
    write_pod(os, static_cast<std::uint32_t>(cache.seq_len()));
    write_pod(os, static_cast<std::uint32_t>(cache.head_dim()));
    write_pod(os, static_cast<std::uint8_t>(cache.bits()));
    for (std::size_t i = 0; i < cache.seq_len(); ++i)
        for (double x : cache.key_row(i)) write_pod(os, static_cast<float>(x));
    for (std::size_t i = 0; i < cache.seq_len(); ++i)
        for (double x : cache.value_row(i)) write_pod(os, static_cast<float>(x));
    for (std::size_t i = 0; i < cache.seq_len(); ++i)
        for (std::uint16_t w : cache.code_words(i)) write_pod(os, w);
    if (!os) throw std::runtime_error("save_snapshot: write failed for " + path.string());
}

KvCache load_snapshot(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_snapshot: cannot open " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("load_snapshot: bad magic");
    const auto version = read_pod<std::uint32_t>(is);
    if (version != kSnapshotVersion) throw std::runtime_error("load_snapshot: unknown version");
    const auto seq_len = read_pod<std::uint32_t>(is);
    const auto head_dim = read_pod<std::uint32_t>(is);
    const auto bits = read_pod<std::uint8_t>(is);
    if (!is) throw std::runtime_error("load_snapshot: truncated header");
    if (bits != 1 && bits != 2) throw std::runtime_error("load_snapshot: unsupported code width");

    KvCache cache(head_dim, bits);
    std::vector<double> keys(std::size_t{seq_len} * head_dim);
    std::vector<double> values(keys.size());
    for (auto& x : keys) x = read_pod<float>(is);
    for (auto& x : values) x = read_pod<float>(is);
    const std::size_t wpc = cache.words_per_code();
    std::vector<std::uint16_t> words(std::size_t{seq_len} * wpc);
    for (auto& w : words) w = read_pod<std::uint16_t>(is);
    if (!is) throw std::runtime_error("load_snapshot: truncated payload");

    for (std::size_t i = 0; i < seq_len; ++i) {
        PackedCodes code;
        code.bits = bits;
        code.len = wpc * (16u / bits);
        code.words.assign(words.begin() + static_cast<std::ptrdiff_t>(i * wpc),
                          words.begin() + static_cast<std::ptrdiff_t>((i + 1) * wpc));
        cache.update(std::span(keys).subspan(i * head_dim, head_dim),
                     std::span(values).subspan(i * head_dim, head_dim), code);
    }
    return cache;
}

}  // namespace adamas
