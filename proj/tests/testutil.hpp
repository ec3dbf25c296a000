#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/gradcheck.hpp"
#include "core/model.hpp"
#include "core/rng.hpp"

namespace testutil {

// Unique scratch directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<uint64_t> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("fnetae_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path file(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

inline void write_jsonl(const std::filesystem::path& path, const std::vector<std::string>& stories) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    for (const auto& s : stories) out << nlohmann::json{{"text", s}}.dump() << '\n';
}

// Deterministic news-like prose. Sentences follow a handful of rigid
// templates so even small models can pick up the structure; `richness`
// controls how many distinct pseudo proper nouns are in rotation.
class StoryGen {
public:
    explicit StoryGen(uint64_t seed, int richness = 200) : rng_(seed) {
        const std::vector<std::string> a = {"bar", "den",  "mor", "vale", "ker",  "lin", "sol",
                                            "tor", "gran", "fel", "wes",  "nor",  "hal", "ber",
                                            "cul", "dra",  "els", "fos",  "gil",  "hov"};
        const std::vector<std::string> b = {"ton", "ford", "dale", "burg", "haven", "field", "port",
                                            "wick", "mont", "shire", "land", "bury", "view", "gate"};
        const std::vector<std::string> c = {"", "ia", "ville", "stead", "moor", "crest", "fall", "ridge"};
        for (const auto& z : c) {
            for (const auto& x : a)
                for (const auto& y : b) {
                    if (static_cast<int>(places_.size()) >= richness) return;
                    places_.push_back(x + y + z);
                }
        }
    }

    std::string story(int min_sentences, int max_sentences) {
        const int n = min_sentences + static_cast<int>(rng_.below(static_cast<uint64_t>(max_sentences - min_sentences + 1)));
        std::string out;
        for (int i = 0; i < n; ++i) {
            if (i) out += ". ";
            out += sentence();
        }
        out += ".";
        return out;
    }

    std::vector<std::string> stories(int count, int min_sentences, int max_sentences) {
        std::vector<std::string> out;
        out.reserve(static_cast<size_t>(count));
        for (int i = 0; i < count; ++i) out.push_back(story(min_sentences, max_sentences));
        return out;
    }

private:
    const std::string& pick(const std::vector<std::string>& pool) {
        return pool[static_cast<size_t>(rng_.below(pool.size()))];
    }

    std::string number() { return std::to_string(2 + rng_.below(997)); }

    std::string sentence() {
        static const std::vector<std::string> subjects = {
            "officials", "residents", "analysts", "investors", "engineers", "farmers",  "teachers",
            "doctors",   "workers",   "voters",   "students",  "lawmakers", "reporters", "scientists"};
        static const std::vector<std::string> verbs = {
            "announced", "reported",  "confirmed", "rejected", "approved", "unveiled", "launched",
            "delayed",   "expanded",  "reviewed",  "praised",  "criticized", "backed", "opposed"};
        static const std::vector<std::string> nouns = {
            "plan",    "budget",  "bridge",  "election", "market", "storm",   "festival", "project",
            "report",  "deal",    "strike",  "policy",   "road",   "school",  "hospital", "factory",
            "program", "measure", "network", "stadium"};
        static const std::vector<std::string> adjectives = {
            "new",     "local",  "major",    "annual",  "regional", "controversial", "ambitious",
            "delayed", "record", "unexpected", "sweeping", "modest", "costly",       "popular"};
        static const std::vector<std::string> weekdays = {"monday", "tuesday",  "wednesday", "thursday",
                                                          "friday", "saturday", "sunday"};
        static const std::vector<std::string> months = {"january", "february", "march",     "april",   "may",
                                                        "june",    "july",     "august",    "september", "october",
                                                        "november", "december"};

        switch (rng_.below(6)) {
            case 0:
                return pick(subjects) + " in " + pick(places_) + " " + pick(verbs) + " the " + pick(adjectives) +
                       " " + pick(nouns) + " on " + pick(weekdays);
            case 1:
                return "the " + pick(adjectives) + " " + pick(nouns) + " in " + pick(places_) + " was " +
                       pick(verbs) + " by " + pick(subjects);
            case 2:
                return pick(subjects) + " said the " + pick(nouns) + " would cost " + number() + " million in " +
                       pick(months);
            case 3:
                return "a " + pick(adjectives) + " " + pick(nouns) + " near " + pick(places_) + " drew " + number() +
                       " " + pick(subjects) + " last " + pick(weekdays);
            case 4:
                return "the " + pick(places_) + " " + pick(nouns) + " was " + pick(verbs) + " after " + number() +
                       " years";
            default:
                return pick(subjects) + " from " + pick(places_) + " to " + pick(places_) + " " + pick(verbs) +
                       " a " + pick(adjectives) + " " + pick(nouns);
        }
    }

    fnetae::Rng rng_;
    std::vector<std::string> places_;
};

// 178 trainable scalars; small enough for finite-difference checks of the
// whole model.
inline fnetae::ModelConfig tiny_config() {
    fnetae::ModelConfig cfg;
    cfg.vocab_size = 10;
    cfg.max_len = 4;
    cfg.embed_dim = 2;
    cfg.latent_dim = 2;
    cfg.num_heads = 1;
    cfg.key_dim = 2;
    cfg.dropout_rate = 0.0f;
    return cfg;
}

// Max relative central-difference error of the reconstruction loss over every
// parameter of a model, at 64-bit precision.
inline double model_grad_max_error(const fnetae::ModelConfig& cfg, int64_t batch, uint64_t seed) {
    using namespace fnetae;
    Rng rng(seed);
    ParamStore<double> params = init_params<double>(param_layout(cfg), rng);
    const MixingPlan<double> plan = MixingPlan<double>::make(cfg.max_len);

    std::vector<int32_t> enc_ids, dec_ids, targets;
    for (int64_t i = 0; i < batch * cfg.max_len; ++i) {
        enc_ids.push_back(static_cast<int32_t>(rng.below(static_cast<uint64_t>(cfg.vocab_size))));
        dec_ids.push_back(static_cast<int32_t>(rng.below(static_cast<uint64_t>(cfg.vocab_size))));
        targets.push_back(static_cast<int32_t>(rng.below(static_cast<uint64_t>(cfg.vocab_size))));
    }

    const auto loss_at_current_params = [&]() {
        Graph<double> g;
        auto bound = bind_params(g, params, /*needs_grad=*/false);
        auto logits = model_forward<double>(g, bound, cfg, plan, enc_ids, dec_ids, batch, false, nullptr);
        return g.value(g.cross_entropy(logits, targets))[0];
    };

    Graph<double> g;
    auto bound = bind_params(g, params);
    auto logits = model_forward<double>(g, bound, cfg, plan, enc_ids, dec_ids, batch, false, nullptr);
    g.backward(g.cross_entropy(logits, targets));

    double worst = 0;
    for (const auto& name : params.names()) {
        const fnetae::Tensor<double> analytic = g.grad(bound.at(name));
        worst = std::max(worst, grad_check(params.at(name), loss_at_current_params, analytic));
    }
    return worst;
}

}  // namespace testutil
