#pragma once

#include <cstddef>
#include <vector>

#include "deft/align.hpp"
#include "deft/corpus.hpp"
#include "deft/subword.hpp"

namespace deft {

// One sentence prepared for the labeling heads: subword ids, alignment back
// to tokens, and per-piece gold categories for the tag, tag-id and relation
// heads.
struct EncodedSentence {
    std::vector<int> ids;
    std::vector<SubwordPiece> pieces;
    SubwordAlignment alignment;
    std::vector<int> piece_tags;
    std::vector<int> piece_id_cats;   // 0..9 slots, 10 = none
    std::vector<int> piece_rel_cats;  // relation indices
    std::size_t window = 0;
    std::size_t sentence = 0;
};

// Tokenizes and aligns every sentence. Tag-id slots are assigned per window
// by first occurrence; windows with more than ten distinct ids add to
// *id_overflow and the excess ids map to none.
std::vector<EncodedSentence> encode_corpus(
    const std::vector<ContextWindow>& windows, const SubwordVocabulary& vocab,
    std::size_t* id_overflow = nullptr);

// Padded minibatch view over encoded sequences.
struct SequenceBatch {
    std::size_t rows = 0;
    std::size_t max_len = 0;
    std::vector<int> ids;      // rows x max_len, padded with pad_id
    std::vector<int> labels;   // rows x max_len, padded with -1
    std::vector<char> mask;    // rows x max_len, 1 = real position
    std::vector<std::size_t> item;  // source index per row

    static SequenceBatch from(const std::vector<EncodedSentence>& data,
                              const std::vector<std::size_t>& indices,
                              int pad_id);
    std::size_t length(std::size_t row) const;
};

}  // namespace deft
