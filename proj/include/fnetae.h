/* fnetae — Fourier-mixing sequence autoencoder, C API.
 *
 * All functions returning fnetae_status report FNETAE_OK (0) on success; on
 * failure, fnetae_last_error() returns a thread-local message describing the
 * most recent error on the calling thread. Strings written to `char**`
 * outputs are owned by the caller and must be released with
 * fnetae_string_free().
 */
#ifndef FNETAE_H
#define FNETAE_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fnetae_status {
    FNETAE_OK = 0,
    FNETAE_ERR_INVALID_ARGUMENT = 1, /* bad parameters, shape/range violations */
    FNETAE_ERR_IO = 2,               /* unreadable/unwritable paths, malformed files */
    FNETAE_ERR_RUNTIME = 3           /* anything else, e.g. diverged training */
} fnetae_status;

const char* fnetae_last_error(void);
void fnetae_string_free(char* s);

/* ---- vocabulary ------------------------------------------------------- */

typedef struct fnetae_vocab fnetae_vocab;

/* Builds a frequency-ranked vocabulary from a corpus file (JSON Lines with a
 * "text" field, or plain text with one story per line). limit <= 0 reads the
 * whole file. out_skipped (optional) receives the count of malformed or
 * empty records. */
fnetae_status fnetae_vocab_build(const char* corpus_path, int64_t limit, int32_t max_size, fnetae_vocab** out_vocab,
                                 int64_t* out_skipped);
fnetae_status fnetae_vocab_save(const fnetae_vocab* vocab, const char* path);
fnetae_status fnetae_vocab_load(const char* path, fnetae_vocab** out_vocab);
int32_t fnetae_vocab_size(const fnetae_vocab* vocab);
void fnetae_vocab_free(fnetae_vocab* vocab);

/* ---- model configuration --------------------------------------------- */

typedef struct fnetae_model_config {
    int32_t vocab_size; /* >= 5 */
    int32_t max_len;    /* >= 2 */
    int32_t embed_dim;
    int32_t latent_dim; /* feed-forward bottleneck width */
    int32_t num_heads;
    int32_t key_dim;      /* 0 -> embed_dim */
    float dropout_rate;   /* [0, 1), training only */
} fnetae_model_config;

/* Fills in the full-size defaults (10000 / 150 / 128 / 64 / 8). */
void fnetae_model_config_init(fnetae_model_config* config);

/* Exact trainable scalar count for a configuration; -1 on invalid config. */
int64_t fnetae_count_params(const fnetae_model_config* config);

/* ---- session: weights + vocabulary + optimizer ------------------------ */

typedef struct fnetae_session fnetae_session;

/* Fresh session with seeded parameter initialization. The vocabulary is
 * copied; config->vocab_size is overridden by the actual vocabulary size. */
fnetae_status fnetae_session_create(const fnetae_model_config* config, const fnetae_vocab* vocab, uint64_t seed,
                                    fnetae_session** out_session);
fnetae_status fnetae_session_open(const char* checkpoint_path, fnetae_session** out_session);
fnetae_status fnetae_session_save(const fnetae_session* session, const char* checkpoint_path);
void fnetae_session_free(fnetae_session* session);

int64_t fnetae_session_param_count(const fnetae_session* session);
int32_t fnetae_session_epoch(const fnetae_session* session);
fnetae_status fnetae_session_config(const fnetae_session* session, fnetae_model_config* out_config);

/* ---- training ---------------------------------------------------------- */

typedef struct fnetae_train_config {
    int32_t batch_size;
    int32_t epochs; /* total target; resuming continues from the saved epoch */
    double learning_rate;
    double adam_beta1;
    double adam_beta2;
    double adam_eps;
    int64_t max_stories;  /* <= 0: all */
    float val_fraction;   /* [0, 1) tail fraction held out for validation */
    const char* checkpoint_path;  /* NULL: no checkpoints */
    int32_t checkpoint_interval;  /* epochs between saves; 0 = final save only */
} fnetae_train_config;

void fnetae_train_config_init(fnetae_train_config* config);

typedef struct fnetae_metrics {
    int32_t epoch;
    double loss;       /* mean cross-entropy, pad positions included */
    double acc_all;    /* token accuracy including pads */
    double acc_masked; /* token accuracy excluding pad targets */
    int32_t acc_masked_defined; /* 0 when the batch had only pad targets */
    double tokens_per_sec;
} fnetae_metrics;

/* Called after each epoch; `validation` is NULL when val_fraction is 0. */
typedef void (*fnetae_epoch_callback)(const fnetae_metrics* train, const fnetae_metrics* validation, void* user);

fnetae_status fnetae_session_train(fnetae_session* session, const char* corpus_path,
                                   const fnetae_train_config* config, fnetae_epoch_callback callback, void* user);

fnetae_status fnetae_session_evaluate(fnetae_session* session, const char* corpus_path, int64_t max_stories,
                                      int32_t batch_size, fnetae_metrics* out_metrics);

/* ---- generation -------------------------------------------------------- */

typedef struct fnetae_gen_config {
    const char* strategy; /* "greedy" or "topk" */
    int32_t top_k;        /* >= 1 when strategy is "topk" */
    int32_t max_steps;    /* 0 -> model max_len - 1 */
    uint64_t sample_seed;
} fnetae_gen_config;

void fnetae_gen_config_init(fnetae_gen_config* config);

fnetae_status fnetae_session_generate(const fnetae_session* session, const char* seed_text,
                                      const fnetae_gen_config* config, char** out_text);

/* ---- results export ----------------------------------------------------- */

typedef struct fnetae_gen_result {
    const char* seed;
    const char* generated;
    const char* strategy;
    const char* checkpoint_id;
} fnetae_gen_result;

/* Writes a JSON array of {seed, generated, strategy, checkpoint-id}. */
fnetae_status fnetae_results_export(const char* path, const fnetae_gen_result* results, int32_t count);

/* "<basename>#<crc32>" identity for a checkpoint file. */
fnetae_status fnetae_checkpoint_id(const char* checkpoint_path, char** out_id);

/* ---- microbenchmark ------------------------------------------------------ */

typedef struct fnetae_bench_row {
    int32_t seq_len;
    double mix_mean_ms, mix_min_ms;
    double attn_mean_ms, attn_min_ms;
    int64_t mix_params; /* always 0 */
    int64_t attn_params;
    double ratio_mean; /* attention / mixing */
    double ratio_min;
} fnetae_bench_row;

/* Forward-only Fourier mixing vs. multi-head self-attention at the same
 * (batch, seq_len, embed_dim) shapes. out_rows must hold n_lens entries.
 * Repetitions below 10 are raised to 10; 3 warmup runs are excluded. */
fnetae_status fnetae_bench_mixing(int32_t batch, int32_t embed_dim, int32_t num_heads, int32_t key_dim,
                                  const int32_t* seq_lens, int32_t n_lens, int32_t repetitions,
                                  fnetae_bench_row* out_rows);

#ifdef __cplusplus
}
#endif

#endif /* FNETAE_H */
