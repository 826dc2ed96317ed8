#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "deft/corpus.hpp"

namespace deft {

struct SubwordPiece {
    std::string text;
    std::size_t begin = 0;  // character span in the tokenized string
    std::size_t end = 0;
};

// Byte-pair-encoding vocabulary. Pieces are ordered: specials first, then the
// printable-ASCII single characters, then learned merges in creation order.
// Segmentation repeatedly merges the adjacent pair whose concatenation has the
// best (lowest) rank, so the ranked piece list alone reproduces it; the file
// format is one piece per line, rank = line number.
class SubwordVocabulary {
public:
    static constexpr std::string_view kUrl = "<url>";
    static constexpr std::string_view kEquation = "<equation>";
    static constexpr std::string_view kUnknown = "<unk>";
    static constexpr std::string_view kPadding = "<pad>";
    static constexpr std::string_view kSequenceStart = "<s>";
    static constexpr std::size_t kNumSpecials = 5;
    static constexpr std::size_t kMinSize = 256 + kNumSpecials;

    // Learns merges from whitespace-split words until the vocabulary reaches
    // `size` pieces (or no pair is left to merge). Deterministic; pair-count
    // ties break lexicographically.
    static SubwordVocabulary build(const std::vector<std::string>& corpus,
                                   std::size_t size);

    static SubwordVocabulary load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    std::size_t size() const { return pieces_.size(); }
    const std::string& piece(int id) const { return pieces_[id]; }
    int id_of(std::string_view piece) const;  // -1 when absent

    int unk_id() const { return unk_id_; }
    int pad_id() const { return pad_id_; }
    int seq_start_id() const { return seq_start_id_; }

    // Splits whitespace-delimited words into ranked pieces; spans tile each
    // word. Specials are atomic; characters outside the vocabulary become
    // <unk> pieces.
    std::vector<SubwordPiece> tokenize(std::string_view s) const;

    std::vector<int> ids(const std::vector<SubwordPiece>& pieces) const;

    std::uint64_t content_hash() const;

private:
    SubwordVocabulary() = default;
    void add_piece(std::string piece);
    void finish_init();

    std::vector<std::string> pieces_;
    std::unordered_map<std::string, int> index_;
    int unk_id_ = -1;
    int pad_id_ = -1;
    int seq_start_id_ = -1;
};

inline std::vector<SubwordPiece> tokenize_subwords(
    std::string_view s, const SubwordVocabulary& v) {
    return v.tokenize(s);
}

}  // namespace deft
