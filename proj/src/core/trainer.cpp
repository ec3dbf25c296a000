#include "core/trainer.hpp"

#include <chrono>
#include <cmath>

#include "core/checkpoint.hpp"

namespace fnetae {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

ModelState ModelState::fresh(const ModelConfig& config, Vocabulary vocab, uint64_t seed, AdamHyper hyper) {
    config.validate();
    ModelState state;
    state.config = config;
    state.vocab = std::move(vocab);
    state.rng = Rng(seed);
    state.params = init_params<float>(param_layout(config), state.rng);
    state.adam = Adam<float>(hyper);
    state.plan = MixingPlan<float>::make(config.max_len);
    return state;
}

Metrics train_epoch(ModelState& state, std::span<const EncodedBatch> batches) {
    const auto start = std::chrono::steady_clock::now();
    MetricTotals totals;
    for (size_t bi = 0; bi < batches.size(); ++bi) {
        const EncodedBatch& batch = batches[bi];
        Graph<float> g;
        auto bound = bind_params(g, state.params);
        auto logits = model_forward<float>(g, bound, state.config, state.plan, batch.enc_ids, batch.dec_input,
                                           batch.batch, /*train_mode=*/true, &state.rng);
        auto loss = g.cross_entropy(logits, batch.dec_target);
        const float loss_value = g.value(loss)[0];
        if (!std::isfinite(loss_value)) throw TrainingDiverged(static_cast<int64_t>(bi));
        g.backward(loss);

        MetricTotals batch_totals = accuracy_totals(g.value(logits), batch.dec_target, kPadId);
        batch_totals.ce_total = static_cast<double>(loss_value) * static_cast<double>(batch_totals.positions);
        totals.merge(batch_totals);

        std::unordered_map<std::string, const Tensor<float>*> grads;
        grads.reserve(state.params.size());
        for (const auto& name : state.params.names()) grads.emplace(name, &g.grad(bound.at(name)));
        state.adam.step(state.params, grads);
    }
    return totals.finalize(state.epoch, seconds_since(start));
}

Metrics evaluate(const ModelState& state, std::span<const EncodedBatch> batches) {
    if (batches.empty()) throw std::invalid_argument("evaluate: no data");
    const auto start = std::chrono::steady_clock::now();
    MetricTotals totals;
    for (const EncodedBatch& batch : batches) {
        Graph<float> g;
        auto bound = bind_params(g, state.params, /*needs_grad=*/false);
        auto logits = model_forward<float>(g, bound, state.config, state.plan, batch.enc_ids, batch.dec_input,
                                           batch.batch, /*train_mode=*/false, nullptr);
        totals.merge(loss_and_metrics(g.value(logits), std::span<const int32_t>(batch.dec_target), kPadId));
    }
    return totals.finalize(state.epoch, seconds_since(start));
}

void run_training(ModelState& state, std::span<const StoryRecord> stories, const TrainConfig& cfg,
                  const EpochCallback& callback) {
    cfg.validate();
    state.adam.set_hyper(cfg.adam);

    std::vector<EncodedStory> encoded;
    encoded.reserve(stories.size());
    for (const auto& story : stories) encoded.push_back(encode_story(state.vocab, story, state.config.max_len));
    if (encoded.empty()) throw std::runtime_error("no training data");

    const auto n = static_cast<int64_t>(encoded.size());
    const auto n_val = static_cast<int64_t>(std::floor(static_cast<double>(n) * cfg.val_fraction));
    const int64_t n_train = n - n_val;
    if (n_train < 1) throw std::runtime_error("validation split leaves no training data");

    std::vector<EncodedBatch> val_batches;
    if (n_val > 0)
        val_batches = make_batches(std::span(encoded).subspan(static_cast<size_t>(n_train)), cfg.batch_size);

    const auto save = [&](const std::filesystem::path& path) { checkpoint_save(path, state); };

    while (state.epoch < cfg.epochs) {
        const auto perm = state.rng.permutation(n_train);
        std::vector<EncodedStory> shuffled;
        shuffled.reserve(static_cast<size_t>(n_train));
        for (int64_t i = 0; i < n_train; ++i) shuffled.push_back(encoded[static_cast<size_t>(perm[static_cast<size_t>(i)])]);
        const auto batches = make_batches(shuffled, cfg.batch_size);

        Metrics train_metrics = train_epoch(state, batches);
        state.epoch += 1;
        train_metrics.epoch = state.epoch;

        EpochReport report;
        report.train = train_metrics;
        if (!val_batches.empty()) report.validation = evaluate(state, val_batches);
        if (callback) callback(report);

        if (!cfg.checkpoint_path.empty() && cfg.checkpoint_interval > 0 && state.epoch % cfg.checkpoint_interval == 0)
            save(cfg.checkpoint_path);
    }
    if (!cfg.checkpoint_path.empty()) save(cfg.checkpoint_path);
}

}  // namespace fnetae
