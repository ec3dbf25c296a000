#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "core/vocab.hpp"

namespace fnetae {

struct LoadResult {
    std::vector<StoryRecord> stories;
    int64_t skipped = 0;  // malformed lines + stories empty after normalization
};

// JSON Lines with a "text" field, or plain text with one story per line;
// detected by the first non-blank character being '{'. At most `limit`
// records are returned when limit > 0.
LoadResult load_corpus(const std::filesystem::path& path, int64_t limit = 0);

// Aligned id sequences for one story: encoder input, teacher-forced decoder
// input and the shifted target, all of length max_len.
struct EncodedStory {
    std::vector<int32_t> enc_ids;
    std::vector<int32_t> dec_input;
    std::vector<int32_t> dec_target;
};

EncodedStory encode_story(const Vocabulary& vocab, const StoryRecord& story, int32_t max_len);

struct EncodedBatch {
    int64_t batch = 0;
    int32_t max_len = 0;
    // (batch, max_len), row-major
    std::vector<int32_t> enc_ids;
    std::vector<int32_t> dec_input;
    std::vector<int32_t> dec_target;
};

// Input order is preserved unless a shuffle seed is given; the final partial
// batch is kept.
std::vector<EncodedBatch> make_batches(std::span<const EncodedStory> encoded, int64_t batch_size,
                                       std::optional<uint64_t> shuffle_seed = std::nullopt);

}  // namespace fnetae
