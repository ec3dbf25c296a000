#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fnetae {

inline constexpr int32_t kPadId = 0;
inline constexpr int32_t kUnkId = 1;
inline constexpr int32_t kStartId = 2;
inline constexpr int32_t kEndId = 3;
inline constexpr std::array<std::string_view, 4> kSpecialTokens = {"[PAD]", "[UNK]", "[START]", "[END]"};

struct StoryRecord {
    std::string text;
};

// Lowercase; keep ASCII letters, digits and apostrophes; everything else
// splits tokens. Empty output is allowed.
std::vector<std::string> normalize_text(std::string_view raw);

// Frequency-ranked token table. Ids 0..3 are the reserved specials; the rest
// are ordered by descending corpus frequency with lexicographic tie-break.
class Vocabulary {
public:
    Vocabulary();  // specials only

    static Vocabulary build(std::span<const StoryRecord> stories, int32_t max_size);
    static Vocabulary from_tokens(std::vector<std::string> tokens);  // validates layout

    int32_t size() const { return static_cast<int32_t>(tokens_.size()); }
    // [UNK] for unknown tokens.
    int32_t id_of(std::string_view token) const;
    const std::string& token(int32_t id) const;
    const std::vector<std::string>& tokens() const { return tokens_; }

    void save(const std::filesystem::path& path) const;
    static Vocabulary load(const std::filesystem::path& path);

    bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int32_t> ids_;
};

// Tokens joined by single spaces; [PAD]/[START]/[END] are omitted, [UNK] is
// rendered literally, decoding stops at the first [END].
std::string decode_ids(const Vocabulary& vocab, std::span<const int32_t> ids);

}  // namespace fnetae
