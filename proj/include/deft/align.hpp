#pragma once

#include <cstddef>
#include <vector>

#include "deft/corpus.hpp"
#include "deft/subword.hpp"

namespace deft {

// Character-matching alignment between original tokens and subword pieces.
// Piece ranges per token are contiguous, ordered, and cover every token.
struct SubwordAlignment {
    std::vector<std::size_t> piece_to_token;           // size = pieces
    std::vector<std::pair<std::size_t, std::size_t>> token_pieces;  // [first, last)
};

// Assigns each piece to the token whose reconstructed span contains the
// piece's start. Throws DataError when a piece crosses a token boundary or a
// token ends up with no piece.
SubwordAlignment align_tokens(const SentenceRecord& sentence,
                              const std::vector<SubwordPiece>& pieces);

// Token labels -> per-piece labels: the first piece inherits the token label
// verbatim, later pieces of a B-X token get I-X, pieces of I-X/O tokens repeat
// the token label.
std::vector<int> project_labels(const SentenceRecord& sentence,
                                const SubwordAlignment& alignment);

// Per-piece labels -> token labels: strict majority per token, otherwise the
// first piece's label when it is among the tied leaders, otherwise the
// lowest-index tied leader.
std::vector<int> resolve_labels(const std::vector<int>& piece_labels,
                                const SubwordAlignment& alignment);

// Same collapse rule applied to any per-piece category sequence (used by the
// tag-id and relation heads).
std::vector<int> resolve_categories(const std::vector<int>& piece_categories,
                                    const SubwordAlignment& alignment,
                                    int num_categories);

}  // namespace deft
