#include "core/generate.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "core/crc32.hpp"
#include "core/kernels.hpp"

namespace fnetae {

namespace {

// Sample from the k largest logits, renormalized. Ties prefer lower ids, so
// k = 1 coincides with greedy decoding.
int32_t pick_top_k(std::span<const float> logits, int32_t k, Rng& rng) {
    const auto n = static_cast<int32_t>(logits.size());
    k = std::min(k, n);
    std::vector<int32_t> ids(static_cast<size_t>(n));
    for (int32_t i = 0; i < n; ++i) ids[static_cast<size_t>(i)] = i;
    std::partial_sort(ids.begin(), ids.begin() + k, ids.end(), [&](int32_t a, int32_t b) {
        if (logits[static_cast<size_t>(a)] != logits[static_cast<size_t>(b)])
            return logits[static_cast<size_t>(a)] > logits[static_cast<size_t>(b)];
        return a < b;
    });

    std::vector<float> top(static_cast<size_t>(k)), probs(static_cast<size_t>(k));
    for (int32_t i = 0; i < k; ++i) top[static_cast<size_t>(i)] = logits[static_cast<size_t>(ids[static_cast<size_t>(i)])];
    kernels::softmax_row(top.data(), probs.data(), k);

    const double u = rng.uniform();
    double cum = 0;
    for (int32_t i = 0; i < k; ++i) {
        cum += static_cast<double>(probs[static_cast<size_t>(i)]);
        if (u < cum) return ids[static_cast<size_t>(i)];
    }
    return ids[static_cast<size_t>(k - 1)];
}

}  // namespace

std::string generate(const ModelState& state, const GenerationRequest& request) {
    request.validate();
    const int32_t l = state.config.max_len;
    const auto enc = encode_story(state.vocab, {request.seed_text}, l);

    // dec_input[0] = [START]; slot t+1 receives the token predicted at
    // position t, so at most max_len - 1 tokens fit.
    int32_t budget = request.max_steps == 0 ? l - 1 : std::min(request.max_steps, l - 1);
    std::vector<int32_t> dec(static_cast<size_t>(l), kPadId);
    dec[0] = kStartId;

    Rng sample_rng(request.sample_seed);
    std::vector<int32_t> emitted;
    for (int32_t step = 0; step < budget; ++step) {
        Graph<float> g;
        auto bound = bind_params(g, state.params, /*needs_grad=*/false);
        auto logits_node = model_forward<float>(g, bound, state.config, state.plan, enc.enc_ids, dec,
                                                /*batch=*/1, /*train_mode=*/false, nullptr);
        const Tensor<float>& logits = g.value(logits_node);
        const int64_t vocab = logits.shape().back();
        std::span<const float> row(logits.data() + static_cast<int64_t>(step) * vocab, static_cast<size_t>(vocab));

        int32_t next;
        if (request.strategy == GenerationRequest::Strategy::greedy)
            next = static_cast<int32_t>(kernels::argmax_row(row.data(), vocab));
        else
            next = pick_top_k(row, request.k, sample_rng);

        emitted.push_back(next);
        if (next == kEndId) break;
        dec[static_cast<size_t>(step) + 1] = next;
    }
    return decode_ids(state.vocab, emitted);
}

void export_results(const std::filesystem::path& path, std::span<const GenerationResult> results) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : results)
        arr.push_back({{"seed", r.seed}, {"generated", r.generated}, {"strategy", r.strategy},
                       {"checkpoint-id", r.checkpoint_id}});
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open results file for writing: " + path.string());
    out << arr.dump(2) << '\n';
    if (!out) throw std::runtime_error("failed writing results file: " + path.string());
}

std::string checkpoint_id(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    // checksum the payload, not the trailing CRC: hashing a file that ends
    // with its own CRC is content-insensitive (the appended CRC cancels any
    // payload difference). For a valid checkpoint this recovers the stored
    // integrity checksum.
    const size_t payload = bytes.size() >= 4 ? bytes.size() - 4 : bytes.size();
    char hex[9];
    std::snprintf(hex, sizeof(hex), "%08x", crc32(bytes.data(), payload));
    return path.filename().string() + "#" + hex;
}

}  // namespace fnetae
