#include "core/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "core/rng.hpp"

namespace fnetae {

namespace {

bool looks_like_jsonl(std::ifstream& in) {
    char c;
    while (in.get(c)) {
        if (!std::isspace(static_cast<unsigned char>(c))) {
            in.seekg(0);
            return c == '{';
        }
    }
    in.clear();
    in.seekg(0);
    return false;
}

}  // namespace

LoadResult load_corpus(const std::filesystem::path& path, int64_t limit) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open corpus file: " + path.string());

    const bool jsonl = looks_like_jsonl(in);
    LoadResult result;
    std::string line;
    while (std::getline(in, line)) {
        if (limit > 0 && static_cast<int64_t>(result.stories.size()) >= limit) break;
        if (!line.empty() && line.back() == '\r') line.pop_back();

        std::string text;
        if (jsonl) {
            auto parsed = nlohmann::json::parse(line, nullptr, false);
            if (parsed.is_discarded() || !parsed.is_object() || !parsed.contains("text") ||
                !parsed["text"].is_string()) {
                ++result.skipped;
                continue;
            }
            text = parsed["text"].get<std::string>();
        } else {
            text = line;
        }
        if (normalize_text(text).empty()) {
            ++result.skipped;
            continue;
        }
        result.stories.push_back({std::move(text)});
    }
    return result;
}

EncodedStory encode_story(const Vocabulary& vocab, const StoryRecord& story, int32_t max_len) {
    if (max_len < 2) throw std::invalid_argument("encode_story: max_len must be >= 2");
    const auto tokens = normalize_text(story.text);
    std::vector<int32_t> ids;
    ids.reserve(tokens.size());
    for (const auto& tok : tokens) ids.push_back(vocab.id_of(tok));

    EncodedStory out;
    const auto len = static_cast<size_t>(max_len);

    out.enc_ids.assign(len, kPadId);
    for (size_t i = 0; i < std::min(ids.size(), len); ++i) out.enc_ids[i] = ids[i];

    // decoder frame: [START] + tokens + [END], right-padded to max_len + 1;
    // content is capped at max_len - 1 so both markers always fit.
    std::vector<int32_t> frame(len + 1, kPadId);
    frame[0] = kStartId;
    const size_t content = std::min(ids.size(), len - 1);
    for (size_t i = 0; i < content; ++i) frame[i + 1] = ids[i];
    frame[content + 1] = kEndId;

    out.dec_input.assign(frame.begin(), frame.begin() + static_cast<int64_t>(len));
    out.dec_target.assign(frame.begin() + 1, frame.end());
    return out;
}

std::vector<EncodedBatch> make_batches(std::span<const EncodedStory> encoded, int64_t batch_size,
                                       std::optional<uint64_t> shuffle_seed) {
    if (batch_size < 1) throw std::invalid_argument("make_batches: batch_size must be >= 1");

    const int64_t n = static_cast<int64_t>(encoded.size());
    std::vector<int64_t> order(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
    if (shuffle_seed) {
        Rng rng(*shuffle_seed);
        order = rng.permutation(n);
    }

    std::vector<EncodedBatch> batches;
    for (int64_t start = 0; start < n; start += batch_size) {
        const int64_t count = std::min(batch_size, n - start);
        const auto max_len = static_cast<int32_t>(encoded[static_cast<size_t>(order[static_cast<size_t>(start)])].enc_ids.size());
        EncodedBatch batch;
        batch.batch = count;
        batch.max_len = max_len;
        batch.enc_ids.reserve(static_cast<size_t>(count * max_len));
        batch.dec_input.reserve(static_cast<size_t>(count * max_len));
        batch.dec_target.reserve(static_cast<size_t>(count * max_len));
        for (int64_t i = 0; i < count; ++i) {
            const EncodedStory& s = encoded[static_cast<size_t>(order[static_cast<size_t>(start + i)])];
            if (static_cast<int32_t>(s.enc_ids.size()) != max_len)
                throw std::invalid_argument("make_batches: inconsistent story lengths");
            batch.enc_ids.insert(batch.enc_ids.end(), s.enc_ids.begin(), s.enc_ids.end());
            batch.dec_input.insert(batch.dec_input.end(), s.dec_input.begin(), s.dec_input.end());
            batch.dec_target.insert(batch.dec_target.end(), s.dec_target.begin(), s.dec_target.end());
        }
        batches.push_back(std::move(batch));
    }
    return batches;
}

}  // namespace fnetae
