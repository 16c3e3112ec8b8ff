#pragma once

#include <filesystem>
#include <span>
#include <utility>

#include "adamas/common.hpp"
#include "adamas/quantizer.hpp"

namespace adamas {

// Append-only per-head store of keys, values, and their quantized codes.
// Single writer; entries are never mutated or evicted, and storage grows in
// fixed-capacity chunks whose buffers never move, so spans handed out for
// existing rows stay valid across later updates. Keys and values are kept at
// full working precision — the codes are the only compressed state.
class KvCache {
public:
    KvCache(std::size_t head_dim, int bits);

    // Appends one token. Codes arrive packed for 1/2-bit caches and as raw
    // bytes for the 3-bit ablation. Returns the new sequence length.
    std::size_t update(std::span<const double> key, std::span<const double> value,
                       const PackedCodes& code);
    std::size_t update(std::span<const double> key, std::span<const double> value,
                       const CodeVector& code);

    // Copies of the rows for a strictly increasing index set, in index order.
    std::pair<RealMatrix, RealMatrix> gather(std::span<const std::size_t> indices) const;

    std::size_t seq_len() const { return seq_len_; }
    std::size_t head_dim() const { return head_dim_; }
    int bits() const { return bits_; }
    std::size_t words_per_code() const { return words_per_code_; }

    std::span<const double> key_row(std::size_t i) const {
        return {row(key_chunks_, i, head_dim_), head_dim_};
    }
    std::span<const double> value_row(std::size_t i) const {
        return {row(value_chunks_, i, head_dim_), head_dim_};
    }
    std::span<const std::uint16_t> code_words(std::size_t i) const {  // bits 1/2
        return {row(word_chunks_, i, words_per_code_), words_per_code_};
    }
    std::span<const std::uint8_t> code_bytes(std::size_t i) const {  // bits 3
        return {row(byte_chunks_, i, head_dim_), head_dim_};
    }

    // Byte accounting under the deployment assumption of 16-bit K/V storage.
    // For 2-bit codes packed_code_bytes() is exactly kv_bytes_fp16() / 16.
    std::size_t packed_code_bytes() const;
    std::size_t kv_bytes_fp16() const;

private:
    static constexpr std::size_t kChunkRows = 2048;

    template <typename T>
    const T* row(const std::vector<std::vector<T>>& chunks, std::size_t i,
                 std::size_t stride) const {
        return chunks[i / kChunkRows].data() + (i % kChunkRows) * stride;
    }
    template <typename T>
    void append_row(std::vector<std::vector<T>>& chunks, const T* src, std::size_t stride);

    std::size_t head_dim_;
    int bits_;
    std::size_t words_per_code_;  // 0 for the 3-bit byte layout
    std::size_t seq_len_ = 0;
    std::vector<std::vector<double>> key_chunks_;
    std::vector<std::vector<double>> value_chunks_;
    std::vector<std::vector<std::uint16_t>> word_chunks_;
    std::vector<std::vector<std::uint8_t>> byte_chunks_;

    void append_kv(std::span<const double> key, std::span<const double> value);
};

// Binary snapshot for test fixtures: header (magic "ADKV", version u32,
// seq_len u32, head_dim u32, bits u8), keys as little-endian f32 row-major,
// values likewise, then packed code words as little-endian u16. Only packed
// (1/2-bit) caches snapshot; keys round to f32.
void save_snapshot(const KvCache& cache, const std::filesystem::path& path);
KvCache load_snapshot(const std::filesystem::path& path);

}  // namespace adamas
