#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

#include "core/corpus.hpp"
#include "core/metrics.hpp"
#include "core/model.hpp"
#include "core/params.hpp"
#include "core/rng.hpp"
#include "core/vocab.hpp"

namespace fnetae {

struct TrainConfig {
    int32_t batch_size = 64;
    int32_t epochs = 50;
    AdamHyper adam;
    uint64_t seed = 0;
    int64_t max_stories = 0;  // 0 = no cap
    float val_fraction = 0.0f;
    std::string checkpoint_path;    // empty = no checkpoints
    int32_t checkpoint_interval = 0;  // epochs between saves; 0 = final only

    void validate() const {
        if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
        if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
        if (!(val_fraction >= 0.0f && val_fraction < 1.0f))
            throw std::invalid_argument("val_fraction must be in [0, 1)");
    }
};

// Model weights plus everything needed to continue training: optimizer
// moments, the completed-epoch counter and the RNG that drives shuffling and
// dropout. Checkpoints capture this struct bit-exactly.
struct ModelState {
    ModelConfig config;
    Vocabulary vocab;
    ParamStore<float> params;
    Adam<float> adam;
    MixingPlan<float> plan;
    int32_t epoch = 0;
    Rng rng;

    static ModelState fresh(const ModelConfig& config, Vocabulary vocab, uint64_t seed, AdamHyper hyper = {});
};

// Raised when a batch produces a non-finite loss.
class TrainingDiverged : public std::runtime_error {
public:
    explicit TrainingDiverged(int64_t batch_index)
        : std::runtime_error("non-finite loss at batch " + std::to_string(batch_index)), batch_index_(batch_index) {}
    int64_t batch_index() const { return batch_index_; }

private:
    int64_t batch_index_;
};

// One pass over the batches: forward (train mode), backward, Adam update.
// Deterministic given the state and batch order.
Metrics train_epoch(ModelState& state, std::span<const EncodedBatch> batches);

// Eval-mode forward only; no dropout, no mutation.
Metrics evaluate(const ModelState& state, std::span<const EncodedBatch> batches);

struct EpochReport {
    Metrics train;
    std::optional<Metrics> validation;
};
using EpochCallback = std::function<void(const EpochReport&)>;

// Full run: encode, split off the validation tail, reshuffle per epoch from
// the session RNG, checkpoint on the configured interval and at the end.
// Continues from state.epoch, so resuming a checkpoint replays exactly.
void run_training(ModelState& state, std::span<const StoryRecord> stories, const TrainConfig& cfg,
                  const EpochCallback& callback = nullptr);

}  // namespace fnetae
