#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "core/trainer.hpp"

namespace fnetae {

struct GenerationRequest {
    enum class Strategy { greedy, top_k };

    std::string seed_text;
    int32_t max_steps = 0;  // 0 -> model max_len; clamped to what the decoder frame can hold
    Strategy strategy = Strategy::greedy;
    int32_t k = 1;
    uint64_t sample_seed = 0;

    void validate() const {
        if (max_steps < 0) throw std::invalid_argument("max_steps must be >= 1 (or 0 for the model maximum)");
        if (strategy == Strategy::top_k && k < 1) throw std::invalid_argument("top-k requires k >= 1");
    }
};

// Encode the seed through the training pipeline, then decode autoregressively
// from [START] until [END] or the step limit. Greedy picks the argmax; top-k
// samples from the k highest logits renormalized, driven by sample_seed.
std::string generate(const ModelState& state, const GenerationRequest& request);

struct GenerationResult {
    std::string seed;
    std::string generated;
    std::string strategy;  // "greedy" or "topk"
    std::string checkpoint_id;
};

// JSON array of {seed, generated, strategy, checkpoint-id}; keys serialize in
// a stable order.
void export_results(const std::filesystem::path& path, std::span<const GenerationResult> results);

// Stable identity for a checkpoint file: "<basename>#<crc32 hex>".
std::string checkpoint_id(const std::filesystem::path& path);

}  // namespace fnetae
