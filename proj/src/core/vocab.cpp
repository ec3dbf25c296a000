#include "core/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>

namespace fnetae {

std::vector<std::string> normalize_text(std::string_view raw) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : raw) {
        if (std::isalnum(c) || c == '\'') {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

Vocabulary::Vocabulary() {
    for (auto s : kSpecialTokens) {
        ids_.emplace(std::string(s), static_cast<int32_t>(tokens_.size()));
        tokens_.emplace_back(s);
    }
}

Vocabulary Vocabulary::build(std::span<const StoryRecord> stories, int32_t max_size) {
    if (max_size < 5) throw std::invalid_argument("vocabulary max_size must be >= 5");
    std::unordered_map<std::string, int64_t> counts;
    for (const auto& story : stories)
        for (auto& tok : normalize_text(story.text)) ++counts[tok];

    std::vector<std::pair<std::string, int64_t>> ranked(counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    Vocabulary vocab;
    const size_t keep = std::min(ranked.size(), static_cast<size_t>(max_size - 4));
    for (size_t i = 0; i < keep; ++i) {
        vocab.ids_.emplace(ranked[i].first, static_cast<int32_t>(vocab.tokens_.size()));
        vocab.tokens_.push_back(std::move(ranked[i].first));
    }
    return vocab;
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
    if (tokens.size() < kSpecialTokens.size()) throw std::invalid_argument("vocabulary must contain the 4 special tokens");
    Vocabulary vocab;
    vocab.tokens_.clear();
    vocab.ids_.clear();
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (i < kSpecialTokens.size() && tokens[i] != kSpecialTokens[i])
            throw std::invalid_argument("token " + std::to_string(i) + " must be " + std::string(kSpecialTokens[i]) +
                                        ", got \"" + tokens[i] + "\"");
        if (!vocab.ids_.emplace(tokens[i], static_cast<int32_t>(i)).second)
            throw std::invalid_argument("duplicate token \"" + tokens[i] + "\"");
        vocab.tokens_.push_back(std::move(tokens[i]));
    }
    return vocab;
}

int32_t Vocabulary::id_of(std::string_view token) const {
    auto it = ids_.find(std::string(token));
    return it == ids_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::token(int32_t id) const {
    if (id < 0 || id >= size())
        throw std::out_of_range("token id " + std::to_string(id) + " out of range for vocabulary of size " +
                                std::to_string(size()));
    return tokens_[static_cast<size_t>(id)];
}

void Vocabulary::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open vocabulary file for writing: " + path.string());
    for (const auto& tok : tokens_) out << tok << '\n';
    if (!out) throw std::runtime_error("failed writing vocabulary file: " + path.string());
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open vocabulary file: " + path.string());
    std::vector<std::string> tokens;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no <= kSpecialTokens.size() && line != kSpecialTokens[line_no - 1])
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected special token " +
                                     std::string(kSpecialTokens[line_no - 1]));
        if (line.empty())
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": empty token line");
        tokens.push_back(std::move(line));
    }
    if (tokens.size() < kSpecialTokens.size())
        throw std::runtime_error(path.string() + ":" + std::to_string(tokens.size() + 1) +
                                 ": missing special tokens (file has only " + std::to_string(tokens.size()) + " lines)");
    try {
        return from_tokens(std::move(tokens));
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

std::string decode_ids(const Vocabulary& vocab, std::span<const int32_t> ids) {
    std::string out;
    for (int32_t id : ids) {
        if (id == kEndId) break;
        if (id == kPadId || id == kStartId) continue;
        const std::string& tok = vocab.token(id);
        if (!out.empty()) out.push_back(' ');
        out += tok;
    }
    return out;
}

}  // namespace fnetae
