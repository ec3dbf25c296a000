// fnetae command line front end. Talks to the core exclusively through the
// C API in fnetae.h. Exit codes: 0 success, 1 usage error, 2 runtime error.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fnetae.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct Options {
    std::string corpus;
    int64_t limit = 0;
    int32_t vocab_size = 10000;
    int32_t max_len = 150;
    int32_t embed = 128;
    int32_t latent = 64;
    int32_t heads = 8;
    int32_t key_dim = 0;
    float dropout = 0.5f;
    int32_t batch = 64;
    int32_t epochs = 50;
    double lr = 1e-3;
    uint64_t seed = 0;
    float val_fraction = 0.0f;
    int32_t checkpoint_interval = 0;
    std::string checkpoint;
    std::string out;
    std::string strategy = "greedy";
    int32_t k = 10;
    int32_t max_steps = 0;
    std::string seq_lens = "128,150,256,512";
    int32_t reps = 10;
    std::string seed_text;
};

int fail(fnetae_status status) {
    std::fprintf(stderr, "error: %s\n", fnetae_last_error());
    return status == FNETAE_ERR_INVALID_ARGUMENT ? kExitUsage : kExitRuntime;
}

fnetae_model_config model_config(const Options& opt) {
    fnetae_model_config cfg;
    fnetae_model_config_init(&cfg);
    cfg.vocab_size = opt.vocab_size;
    cfg.max_len = opt.max_len;
    cfg.embed_dim = opt.embed;
    cfg.latent_dim = opt.latent;
    cfg.num_heads = opt.heads;
    cfg.key_dim = opt.key_dim;
    cfg.dropout_rate = opt.dropout;
    return cfg;
}

void print_metrics(const char* tag, const fnetae_metrics* m) {
    std::printf("%s epoch %d  loss %.4f  acc_all %.4f  acc_masked %.4f%s  tok/s %.0f\n", tag, m->epoch, m->loss,
                m->acc_all, m->acc_masked, m->acc_masked_defined ? "" : " (undefined)", m->tokens_per_sec);
}

void epoch_printer(const fnetae_metrics* train, const fnetae_metrics* val, void*) {
    print_metrics("train", train);
    if (val) print_metrics("  val", val);
    std::fflush(stdout);
}

std::vector<int32_t> parse_seq_lens(const std::string& csv) {
    std::vector<int32_t> lens;
    size_t start = 0;
    while (start <= csv.size()) {
        const size_t comma = csv.find(',', start);
        const std::string item = csv.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!item.empty()) lens.push_back(std::stoi(item));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return lens;
}

using SessionPtr = std::unique_ptr<fnetae_session, decltype(&fnetae_session_free)>;
using VocabPtr = std::unique_ptr<fnetae_vocab, decltype(&fnetae_vocab_free)>;

int cmd_build_vocab(const Options& opt) {
    fnetae_vocab* vocab = nullptr;
    int64_t skipped = 0;
    if (auto st = fnetae_vocab_build(opt.corpus.c_str(), opt.limit, opt.vocab_size, &vocab, &skipped)) return fail(st);
    VocabPtr guard(vocab, fnetae_vocab_free);
    if (auto st = fnetae_vocab_save(vocab, opt.out.c_str())) return fail(st);
    std::printf("vocabulary: %d tokens (skipped %" PRId64 " records) -> %s\n", fnetae_vocab_size(vocab), skipped,
                opt.out.c_str());
    return kExitOk;
}

int cmd_count_params(const Options& opt) {
    const fnetae_model_config cfg = model_config(opt);
    const int64_t n = fnetae_count_params(&cfg);
    if (n < 0) return fail(FNETAE_ERR_INVALID_ARGUMENT);
    std::printf("%" PRId64 "\n", n);
    return kExitOk;
}

int cmd_train(const Options& opt) {
    SessionPtr session(nullptr, fnetae_session_free);
    if (!opt.checkpoint.empty() && std::filesystem::exists(opt.checkpoint)) {
        fnetae_session* raw = nullptr;
        if (auto st = fnetae_session_open(opt.checkpoint.c_str(), &raw)) return fail(st);
        session.reset(raw);
        std::printf("resuming from %s (epoch %d)\n", opt.checkpoint.c_str(), fnetae_session_epoch(raw));
    } else {
        fnetae_vocab* vocab = nullptr;
        if (auto st = fnetae_vocab_build(opt.corpus.c_str(), opt.limit, opt.vocab_size, &vocab, nullptr))
            return fail(st);
        VocabPtr vguard(vocab, fnetae_vocab_free);
        const fnetae_model_config cfg = model_config(opt);
        fnetae_session* raw = nullptr;
        if (auto st = fnetae_session_create(&cfg, vocab, opt.seed, &raw)) return fail(st);
        session.reset(raw);
        std::printf("new model: %" PRId64 " parameters, vocabulary %d\n", fnetae_session_param_count(raw),
                    fnetae_vocab_size(vocab));
    }

    fnetae_train_config train_cfg;
    fnetae_train_config_init(&train_cfg);
    train_cfg.batch_size = opt.batch;
    train_cfg.epochs = opt.epochs;
    train_cfg.learning_rate = opt.lr;
    train_cfg.max_stories = opt.limit;
    train_cfg.val_fraction = opt.val_fraction;
    train_cfg.checkpoint_path = opt.checkpoint.empty() ? nullptr : opt.checkpoint.c_str();
    train_cfg.checkpoint_interval = opt.checkpoint_interval;

    if (auto st = fnetae_session_train(session.get(), opt.corpus.c_str(), &train_cfg, epoch_printer, nullptr))
        return fail(st);
    if (!opt.checkpoint.empty()) std::printf("checkpoint written to %s\n", opt.checkpoint.c_str());
    return kExitOk;
}

int cmd_eval(const Options& opt) {
    fnetae_session* raw = nullptr;
    if (auto st = fnetae_session_open(opt.checkpoint.c_str(), &raw)) return fail(st);
    SessionPtr session(raw, fnetae_session_free);
    fnetae_metrics metrics{};
    if (auto st = fnetae_session_evaluate(raw, opt.corpus.c_str(), opt.limit, opt.batch, &metrics)) return fail(st);
    print_metrics("eval", &metrics);
    return kExitOk;
}

int cmd_generate(const Options& opt) {
    if (opt.checkpoint.empty()) {
        std::fprintf(stderr, "error: checkpoint required\n");
        return kExitRuntime;
    }
    fnetae_session* raw = nullptr;
    if (auto st = fnetae_session_open(opt.checkpoint.c_str(), &raw)) return fail(st);
    SessionPtr session(raw, fnetae_session_free);

    fnetae_gen_config cfg;
    fnetae_gen_config_init(&cfg);
    cfg.strategy = opt.strategy.c_str();
    cfg.top_k = opt.k;
    cfg.max_steps = opt.max_steps;
    cfg.sample_seed = opt.seed;

    char* text = nullptr;
    if (auto st = fnetae_session_generate(raw, opt.seed_text.c_str(), &cfg, &text)) return fail(st);
    std::printf("%s\n", text);
    fnetae_string_free(text);
    return kExitOk;
}

int cmd_export_results(const Options& opt) {
    if (opt.checkpoint.empty()) {
        std::fprintf(stderr, "error: checkpoint required\n");
        return kExitRuntime;
    }
    fnetae_session* raw = nullptr;
    if (auto st = fnetae_session_open(opt.checkpoint.c_str(), &raw)) return fail(st);
    SessionPtr session(raw, fnetae_session_free);

    char* ckpt_id = nullptr;
    if (auto st = fnetae_checkpoint_id(opt.checkpoint.c_str(), &ckpt_id)) return fail(st);
    const std::string checkpoint_id = ckpt_id;
    fnetae_string_free(ckpt_id);

    // one seed text per line; blank lines are skipped
    std::ifstream in(opt.corpus);
    if (!in) {
        std::fprintf(stderr, "error: cannot open seed file: %s\n", opt.corpus.c_str());
        return kExitRuntime;
    }
    std::vector<std::string> seeds;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) seeds.push_back(line);
        if (opt.limit > 0 && static_cast<int64_t>(seeds.size()) >= opt.limit) break;
    }

    fnetae_gen_config cfg;
    fnetae_gen_config_init(&cfg);
    cfg.strategy = opt.strategy.c_str();
    cfg.top_k = opt.k;
    cfg.max_steps = opt.max_steps;
    cfg.sample_seed = opt.seed;

    std::vector<std::string> generated(seeds.size());
    std::vector<fnetae_gen_result> rows(seeds.size());
    for (size_t i = 0; i < seeds.size(); ++i) {
        char* text = nullptr;
        if (auto st = fnetae_session_generate(raw, seeds[i].c_str(), &cfg, &text)) return fail(st);
        generated[i] = text;
        fnetae_string_free(text);
        rows[i] = {seeds[i].c_str(), generated[i].c_str(), opt.strategy.c_str(), checkpoint_id.c_str()};
    }
    if (auto st = fnetae_results_export(opt.out.c_str(), rows.data(), static_cast<int32_t>(rows.size())))
        return fail(st);
    std::printf("wrote %zu results to %s\n", rows.size(), opt.out.c_str());
    return kExitOk;
}

int cmd_bench(const Options& opt) {
    const auto lens = parse_seq_lens(opt.seq_lens);
    if (lens.empty()) {
        std::fprintf(stderr, "error: --seq-lens is empty\n");
        return kExitUsage;
    }
    std::vector<fnetae_bench_row> rows(lens.size());
    if (auto st = fnetae_bench_mixing(opt.batch, opt.embed, opt.heads, opt.key_dim, lens.data(),
                                      static_cast<int32_t>(lens.size()), opt.reps, rows.data()))
        return fail(st);

    std::printf("%8s %12s %12s %12s %12s %10s %12s %8s\n", "seq_len", "mix_mean_ms", "mix_min_ms", "attn_mean_ms",
                "attn_min_ms", "mix_params", "attn_params", "ratio");
    for (const auto& r : rows)
        std::printf("%8d %12.3f %12.3f %12.3f %12.3f %10" PRId64 " %12" PRId64 " %8.2f\n", r.seq_len, r.mix_mean_ms,
                    r.mix_min_ms, r.attn_mean_ms, r.attn_min_ms, r.mix_params, r.attn_params, r.ratio_mean);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"FNet-style sequence autoencoder: vocabulary building, training, generation and benchmarks"};
    app.require_subcommand(1);
    Options opt;

    auto add_model_flags = [&](CLI::App* cmd) {
        cmd->add_option("--vocab-size,--vocab", opt.vocab_size, "maximum vocabulary size incl. specials");
        cmd->add_option("--max-len", opt.max_len, "sequence length in tokens");
        cmd->add_option("--embed", opt.embed, "embedding dimension");
        cmd->add_option("--latent", opt.latent, "feed-forward bottleneck width");
        cmd->add_option("--heads", opt.heads, "attention heads");
        cmd->add_option("--key-dim", opt.key_dim, "per-head key dimension (0 = embed)");
        cmd->add_option("--dropout", opt.dropout, "dropout rate before the output projection");
    };

    auto* build_vocab = app.add_subcommand("build-vocab", "build and save a vocabulary from a corpus");
    build_vocab->add_option("--corpus", opt.corpus, "corpus file (JSONL or plain text)")->required();
    build_vocab->add_option("--limit", opt.limit, "max stories to read");
    build_vocab->add_option("--vocab-size,--vocab", opt.vocab_size, "maximum vocabulary size incl. specials");
    build_vocab->add_option("--out", opt.out, "output vocabulary file")->required();

    auto* train = app.add_subcommand("train", "train (or resume) a model on a corpus");
    train->add_option("--corpus", opt.corpus, "corpus file")->required();
    train->add_option("--limit", opt.limit, "max stories to use");
    add_model_flags(train);
    train->add_option("--batch", opt.batch, "batch size");
    train->add_option("--epochs", opt.epochs, "total epochs to reach");
    train->add_option("--lr", opt.lr, "Adam learning rate");
    train->add_option("--seed", opt.seed, "init/shuffle/dropout seed");
    train->add_option("--val-fraction", opt.val_fraction, "tail fraction held out for validation");
    train->add_option("--checkpoint", opt.checkpoint, "checkpoint path (resumes if it exists)");
    train->add_option("--checkpoint-interval", opt.checkpoint_interval, "epochs between checkpoint saves");

    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a corpus");
    eval->add_option("--checkpoint", opt.checkpoint, "checkpoint path")->required();
    eval->add_option("--corpus", opt.corpus, "corpus file")->required();
    eval->add_option("--limit", opt.limit, "max stories to use");
    eval->add_option("--batch", opt.batch, "batch size");

    auto* generate = app.add_subcommand("generate", "generate text from a seed");
    generate->add_option("--checkpoint", opt.checkpoint, "checkpoint path");
    generate->add_option("--strategy", opt.strategy, "greedy|topk")->check(CLI::IsMember({"greedy", "topk"}));
    generate->add_option("--k", opt.k, "top-k candidate count");
    generate->add_option("--max-steps", opt.max_steps, "max tokens to emit (0 = max_len-1)");
    generate->add_option("--seed", opt.seed, "sampling seed (topk)");
    generate->add_option("text", opt.seed_text, "seed text (may be empty)");

    auto* count = app.add_subcommand("count-params", "print the trainable parameter count for a configuration");
    add_model_flags(count);

    auto* bench = app.add_subcommand("bench", "time Fourier mixing vs self-attention forward passes");
    bench->add_option("--seq-lens", opt.seq_lens, "comma-separated sequence lengths");
    bench->add_option("--reps", opt.reps, "timed repetitions per layer (min 10)");
    bench->add_option("--batch", opt.batch, "benchmark batch size")->default_val(8);
    bench->add_option("--embed", opt.embed, "embedding dimension");
    bench->add_option("--heads", opt.heads, "attention heads");
    bench->add_option("--key-dim", opt.key_dim, "per-head key dimension (0 = embed)");

    auto* export_results = app.add_subcommand("export-results", "generate for each seed line and write a JSON report");
    export_results->add_option("--checkpoint", opt.checkpoint, "checkpoint path");
    export_results->add_option("--corpus", opt.corpus, "seed text file, one seed per line")->required();
    export_results->add_option("--limit", opt.limit, "max seeds to read");
    export_results->add_option("--out", opt.out, "output JSON path")->required();
    export_results->add_option("--strategy", opt.strategy, "greedy|topk")->check(CLI::IsMember({"greedy", "topk"}));
    export_results->add_option("--k", opt.k, "top-k candidate count");
    export_results->add_option("--max-steps", opt.max_steps, "max tokens to emit");
    export_results->add_option("--seed", opt.seed, "sampling seed (topk)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the message and usage hint
        return kExitUsage;
    }

    try {
        if (build_vocab->parsed()) return cmd_build_vocab(opt);
        if (train->parsed()) return cmd_train(opt);
        if (eval->parsed()) return cmd_eval(opt);
        if (generate->parsed()) return cmd_generate(opt);
        if (count->parsed()) return cmd_count_params(opt);
        if (bench->parsed()) return cmd_bench(opt);
        if (export_results->parsed()) return cmd_export_results(opt);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
    return kExitUsage;
}
