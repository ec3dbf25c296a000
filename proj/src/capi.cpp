// extern-C wrapper over the C++ core. Exceptions stop here and become status
// codes plus a thread-local message.

#include "fnetae.h"

#include <cstring>
#include <exception>
#include <string>

#include "core/bench.hpp"
#include "core/checkpoint.hpp"
#include "core/corpus.hpp"
#include "core/generate.hpp"
#include "core/model.hpp"
#include "core/trainer.hpp"
#include "core/vocab.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(std::string message) { g_last_error = std::move(message); }

fnetae_status classify(const std::exception& e) {
    set_error(e.what());
    if (dynamic_cast<const std::invalid_argument*>(&e) || dynamic_cast<const std::out_of_range*>(&e))
        return FNETAE_ERR_INVALID_ARGUMENT;
    return FNETAE_ERR_RUNTIME;
}

template <typename F>
fnetae_status guarded(F&& fn, fnetae_status io_bias = FNETAE_ERR_RUNTIME) {
    try {
        fn();
        return FNETAE_OK;
    } catch (const std::invalid_argument& e) {
        set_error(e.what());
        return FNETAE_ERR_INVALID_ARGUMENT;
    } catch (const std::out_of_range& e) {
        set_error(e.what());
        return FNETAE_ERR_INVALID_ARGUMENT;
    } catch (const std::exception& e) {
        set_error(e.what());
        return io_bias;
    } catch (...) {
        set_error("unknown error");
        return FNETAE_ERR_RUNTIME;
    }
}

fnetae_status require(bool ok, const char* message) {
    if (!ok) set_error(message);
    return ok ? FNETAE_OK : FNETAE_ERR_INVALID_ARGUMENT;
}

char* copy_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

fnetae::ModelConfig to_core(const fnetae_model_config& c) {
    fnetae::ModelConfig out;
    out.vocab_size = c.vocab_size;
    out.max_len = c.max_len;
    out.embed_dim = c.embed_dim;
    out.latent_dim = c.latent_dim;
    out.num_heads = c.num_heads;
    out.key_dim = c.key_dim;
    out.dropout_rate = c.dropout_rate;
    return out;
}

fnetae_model_config from_core(const fnetae::ModelConfig& c) {
    fnetae_model_config out{};
    out.vocab_size = c.vocab_size;
    out.max_len = c.max_len;
    out.embed_dim = c.embed_dim;
    out.latent_dim = c.latent_dim;
    out.num_heads = c.num_heads;
    out.key_dim = c.key_dim;
    out.dropout_rate = c.dropout_rate;
    return out;
}

fnetae_metrics to_capi(const fnetae::Metrics& m) {
    fnetae_metrics out{};
    out.epoch = m.epoch;
    out.loss = m.loss;
    out.acc_all = m.acc_all;
    out.acc_masked = m.acc_masked;
    out.acc_masked_defined = m.acc_masked_defined ? 1 : 0;
    out.tokens_per_sec = m.tokens_per_sec;
    return out;
}

}  // namespace

struct fnetae_vocab {
    fnetae::Vocabulary impl;
};

struct fnetae_session {
    fnetae::ModelState state;
};

extern "C" {

const char* fnetae_last_error(void) { return g_last_error.c_str(); }

void fnetae_string_free(char* s) { delete[] s; }

/* ---- vocabulary ---- */

fnetae_status fnetae_vocab_build(const char* corpus_path, int64_t limit, int32_t max_size, fnetae_vocab** out_vocab,
                                 int64_t* out_skipped) {
    if (auto st = require(corpus_path && out_vocab, "corpus_path and out_vocab are required")) return st;
    return guarded(
        [&] {
            auto loaded = fnetae::load_corpus(corpus_path, limit);
            auto vocab = fnetae::Vocabulary::build(loaded.stories, max_size);
            if (out_skipped) *out_skipped = loaded.skipped;
            *out_vocab = new fnetae_vocab{std::move(vocab)};
        },
        FNETAE_ERR_IO);
}

fnetae_status fnetae_vocab_save(const fnetae_vocab* vocab, const char* path) {
    if (auto st = require(vocab && path, "vocab and path are required")) return st;
    return guarded([&] { vocab->impl.save(path); }, FNETAE_ERR_IO);
}

fnetae_status fnetae_vocab_load(const char* path, fnetae_vocab** out_vocab) {
    if (auto st = require(path && out_vocab, "path and out_vocab are required")) return st;
    return guarded([&] { *out_vocab = new fnetae_vocab{fnetae::Vocabulary::load(path)}; }, FNETAE_ERR_IO);
}

int32_t fnetae_vocab_size(const fnetae_vocab* vocab) { return vocab ? vocab->impl.size() : 0; }

void fnetae_vocab_free(fnetae_vocab* vocab) { delete vocab; }

/* ---- config ---- */

void fnetae_model_config_init(fnetae_model_config* config) {
    if (!config) return;
    *config = from_core(fnetae::ModelConfig{});
}

int64_t fnetae_count_params(const fnetae_model_config* config) {
    if (!config) {
        set_error("config is required");
        return -1;
    }
    try {
        return fnetae::count_params(to_core(*config));
    } catch (const std::exception& e) {
        set_error(e.what());
        return -1;
    }
}

/* ---- session ---- */

fnetae_status fnetae_session_create(const fnetae_model_config* config, const fnetae_vocab* vocab, uint64_t seed,
                                    fnetae_session** out_session) {
    if (auto st = require(config && vocab && out_session, "config, vocab and out_session are required")) return st;
    return guarded([&] {
        fnetae::ModelConfig cfg = to_core(*config);
        cfg.vocab_size = vocab->impl.size();
        *out_session = new fnetae_session{fnetae::ModelState::fresh(cfg, vocab->impl, seed)};
    });
}

fnetae_status fnetae_session_open(const char* checkpoint_path, fnetae_session** out_session) {
    if (auto st = require(checkpoint_path && out_session, "checkpoint_path and out_session are required")) return st;
    return guarded([&] { *out_session = new fnetae_session{fnetae::checkpoint_load(checkpoint_path)}; },
                   FNETAE_ERR_IO);
}

fnetae_status fnetae_session_save(const fnetae_session* session, const char* checkpoint_path) {
    if (auto st = require(session && checkpoint_path, "session and checkpoint_path are required")) return st;
    return guarded([&] { fnetae::checkpoint_save(checkpoint_path, session->state); }, FNETAE_ERR_IO);
}

void fnetae_session_free(fnetae_session* session) { delete session; }

int64_t fnetae_session_param_count(const fnetae_session* session) {
    return session ? session->state.params.scalar_count() : -1;
}

int32_t fnetae_session_epoch(const fnetae_session* session) { return session ? session->state.epoch : -1; }

fnetae_status fnetae_session_config(const fnetae_session* session, fnetae_model_config* out_config) {
    if (auto st = require(session && out_config, "session and out_config are required")) return st;
    *out_config = from_core(session->state.config);
    return FNETAE_OK;
}

/* ---- training ---- */

void fnetae_train_config_init(fnetae_train_config* config) {
    if (!config) return;
    fnetae::TrainConfig d;
    *config = fnetae_train_config{};
    config->batch_size = d.batch_size;
    config->epochs = d.epochs;
    config->learning_rate = d.adam.learning_rate;
    config->adam_beta1 = d.adam.beta1;
    config->adam_beta2 = d.adam.beta2;
    config->adam_eps = d.adam.eps;
    config->max_stories = 0;
    config->val_fraction = 0.0f;
    config->checkpoint_path = nullptr;
    config->checkpoint_interval = 0;
}

fnetae_status fnetae_session_train(fnetae_session* session, const char* corpus_path,
                                   const fnetae_train_config* config, fnetae_epoch_callback callback, void* user) {
    if (auto st = require(session && corpus_path && config, "session, corpus_path and config are required")) return st;
    return guarded(
        [&] {
            fnetae::TrainConfig cfg;
            cfg.batch_size = config->batch_size;
            cfg.epochs = config->epochs;
            cfg.adam = {config->learning_rate, config->adam_beta1, config->adam_beta2, config->adam_eps};
            cfg.max_stories = config->max_stories;
            cfg.val_fraction = config->val_fraction;
            if (config->checkpoint_path) cfg.checkpoint_path = config->checkpoint_path;
            cfg.checkpoint_interval = config->checkpoint_interval;

            auto loaded = fnetae::load_corpus(corpus_path, cfg.max_stories);
            fnetae::run_training(session->state, loaded.stories, cfg, [&](const fnetae::EpochReport& report) {
                if (!callback) return;
                const fnetae_metrics train = to_capi(report.train);
                if (report.validation) {
                    const fnetae_metrics val = to_capi(*report.validation);
                    callback(&train, &val, user);
                } else {
                    callback(&train, nullptr, user);
                }
            });
        });
}

fnetae_status fnetae_session_evaluate(fnetae_session* session, const char* corpus_path, int64_t max_stories,
                                      int32_t batch_size, fnetae_metrics* out_metrics) {
    if (auto st = require(session && corpus_path && out_metrics, "session, corpus_path and out_metrics are required"))
        return st;
    return guarded([&] {
        auto loaded = fnetae::load_corpus(corpus_path, max_stories);
        std::vector<fnetae::EncodedStory> encoded;
        encoded.reserve(loaded.stories.size());
        for (const auto& story : loaded.stories)
            encoded.push_back(fnetae::encode_story(session->state.vocab, story, session->state.config.max_len));
        const auto batches = fnetae::make_batches(encoded, batch_size > 0 ? batch_size : 64);
        *out_metrics = to_capi(fnetae::evaluate(session->state, batches));
    });
}

/* ---- generation ---- */

void fnetae_gen_config_init(fnetae_gen_config* config) {
    if (!config) return;
    config->strategy = "greedy";
    config->top_k = 1;
    config->max_steps = 0;
    config->sample_seed = 0;
}

fnetae_status fnetae_session_generate(const fnetae_session* session, const char* seed_text,
                                      const fnetae_gen_config* config, char** out_text) {
    if (auto st = require(session && config && out_text, "session, config and out_text are required")) return st;
    return guarded([&] {
        fnetae::GenerationRequest request;
        request.seed_text = seed_text ? seed_text : "";
        request.max_steps = config->max_steps;
        const std::string strategy = config->strategy ? config->strategy : "greedy";
        if (strategy == "greedy") {
            request.strategy = fnetae::GenerationRequest::Strategy::greedy;
        } else if (strategy == "topk") {
            request.strategy = fnetae::GenerationRequest::Strategy::top_k;
            request.k = config->top_k;
            request.sample_seed = config->sample_seed;
        } else {
            throw std::invalid_argument("unknown generation strategy \"" + strategy + "\" (expected greedy or topk)");
        }
        *out_text = copy_string(fnetae::generate(session->state, request));
    });
}

/* ---- results export ---- */

fnetae_status fnetae_results_export(const char* path, const fnetae_gen_result* results, int32_t count) {
    if (auto st = require(path && (results || count == 0) && count >= 0, "path and results are required")) return st;
    return guarded(
        [&] {
            std::vector<fnetae::GenerationResult> rows;
            rows.reserve(static_cast<size_t>(count));
            for (int32_t i = 0; i < count; ++i) {
                const auto& r = results[i];
                rows.push_back({r.seed ? r.seed : "", r.generated ? r.generated : "", r.strategy ? r.strategy : "",
                                r.checkpoint_id ? r.checkpoint_id : ""});
            }
            fnetae::export_results(path, rows);
        },
        FNETAE_ERR_IO);
}

fnetae_status fnetae_checkpoint_id(const char* checkpoint_path, char** out_id) {
    if (auto st = require(checkpoint_path && out_id, "checkpoint_path and out_id are required")) return st;
    return guarded([&] { *out_id = copy_string(fnetae::checkpoint_id(checkpoint_path)); }, FNETAE_ERR_IO);
}

/* ---- benchmark ---- */

fnetae_status fnetae_bench_mixing(int32_t batch, int32_t embed_dim, int32_t num_heads, int32_t key_dim,
                                  const int32_t* seq_lens, int32_t n_lens, int32_t repetitions,
                                  fnetae_bench_row* out_rows) {
    if (auto st = require(seq_lens && out_rows && n_lens > 0, "seq_lens and out_rows are required")) return st;
    return guarded([&] {
        fnetae::BenchConfig cfg;
        cfg.batch = batch;
        cfg.embed_dim = embed_dim;
        cfg.num_heads = num_heads;
        cfg.key_dim = key_dim;
        cfg.repetitions = repetitions;
        const auto rows = fnetae::bench_mixing(cfg, std::span(seq_lens, static_cast<size_t>(n_lens)));
        for (size_t i = 0; i < rows.size(); ++i) {
            const auto& r = rows[i];
            out_rows[i] = fnetae_bench_row{r.seq_len,      r.mix_mean_ms, r.mix_min_ms, r.attn_mean_ms,
                                           r.attn_min_ms,  r.mix_params,  r.attn_params, r.ratio_mean,
                                           r.ratio_min};
        }
    });
}

}  // extern "C"
