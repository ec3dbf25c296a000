#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace fnetae {

struct BenchConfig {
    int32_t batch = 8;
    int32_t embed_dim = 128;
    int32_t num_heads = 8;
    int32_t key_dim = 0;  // 0 -> embed_dim
    int32_t repetitions = 10;  // raised to 10 if lower
    uint64_t seed = 42;
};

struct BenchRow {
    int32_t seq_len = 0;
    double mix_mean_ms = 0, mix_min_ms = 0;
    double attn_mean_ms = 0, attn_min_ms = 0;
    int64_t mix_params = 0;   // always 0: the mixing layer is parameter-free
    int64_t attn_params = 0;
    double ratio_mean = 0;  // attention / mixing
    double ratio_min = 0;
};

// Forward-only wall time of Fourier token mixing vs multi-head self-attention
// at identical (batch, seq, embed) shapes, after 3 warmup runs per layer.
std::vector<BenchRow> bench_mixing(const BenchConfig& cfg, std::span<const int32_t> seq_lens);

}  // namespace fnetae
