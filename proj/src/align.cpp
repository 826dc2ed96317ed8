#include "deft/align.hpp"

#include <algorithm>
#include <string>

#include "deft/error.hpp"

namespace deft {

SubwordAlignment align_tokens(const SentenceRecord& sentence,
                              const std::vector<SubwordPiece>& pieces) {
    SubwordAlignment a;
    a.piece_to_token.reserve(pieces.size());
    a.token_pieces.assign(sentence.tokens.size(), {0, 0});

    std::size_t t = 0;
    for (std::size_t p = 0; p < pieces.size(); ++p) {
        while (t < sentence.tokens.size() &&
               pieces[p].begin >= sentence.token_spans[t].end)
            ++t;
        if (t >= sentence.tokens.size() ||
            pieces[p].begin < sentence.token_spans[t].begin)
            throw DataError("subword piece '" + pieces[p].text +
                            "' falls outside every token span");
        if (pieces[p].end > sentence.token_spans[t].end)
            throw DataError("subword piece '" + pieces[p].text +
                            "' crosses a token boundary");
        if (a.token_pieces[t].first == a.token_pieces[t].second)
            a.token_pieces[t] = {p, p + 1};
        else
            a.token_pieces[t].second = p + 1;
        a.piece_to_token.push_back(t);
    }

    for (std::size_t i = 0; i < sentence.tokens.size(); ++i)
        if (a.token_pieces[i].first == a.token_pieces[i].second)
            throw DataError("token '" + sentence.tokens[i].text +
                            "' received no subword piece");
    return a;
}

std::vector<int> project_labels(const SentenceRecord& sentence,
                                const SubwordAlignment& alignment) {
    std::vector<int> out(alignment.piece_to_token.size(), 0);
    for (std::size_t t = 0; t < sentence.tokens.size(); ++t) {
        auto [first, last] = alignment.token_pieces[t];
        int label = sentence.tokens[t].tag;
        out[first] = label;
        for (std::size_t p = first + 1; p < last; ++p)
            out[p] = TagVocabulary::to_inside(label);
    }
    return out;
}

std::vector<int> resolve_categories(const std::vector<int>& piece_categories,
                                    const SubwordAlignment& alignment,
                                    int num_categories) {
    std::vector<int> out;
    out.reserve(alignment.token_pieces.size());
    std::vector<int> counts(static_cast<std::size_t>(num_categories), 0);
    for (auto [first, last] : alignment.token_pieces) {
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t p = first; p < last; ++p)
            ++counts[static_cast<std::size_t>(piece_categories[p])];
        int max_count = 0;
        for (int c : counts) max_count = std::max(max_count, c);
        int first_label = piece_categories[first];
        if (counts[static_cast<std::size_t>(first_label)] == max_count) {
            // Covers both the strict-majority case when the first piece holds
            // the majority label and the tie case, where the first piece wins.
            out.push_back(first_label);
            continue;
        }
        int chosen = -1;
        for (int c = 0; c < num_categories; ++c)
            if (counts[static_cast<std::size_t>(c)] == max_count) {
                chosen = c;
                break;
            }
        out.push_back(chosen);
    }
    return out;
}

std::vector<int> resolve_labels(const std::vector<int>& piece_labels,
                                const SubwordAlignment& alignment) {
    return resolve_categories(piece_labels, alignment,
                              TagVocabulary::kNumLabels);
}

}  // namespace deft
