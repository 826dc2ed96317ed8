#include "deft/pipeline.hpp"

#include <algorithm>

#include "deft/heads.hpp"

namespace deft {

std::vector<EncodedSentence> encode_corpus(
    const std::vector<ContextWindow>& windows, const SubwordVocabulary& vocab,
    std::size_t* id_overflow) {
    std::vector<EncodedSentence> out;
    for (std::size_t w = 0; w < windows.size(); ++w) {
        const auto id_cats = window_id_categories(windows[w], id_overflow);
        for (std::size_t s = 0; s < windows[w].sentences.size(); ++s) {
            const SentenceRecord& sentence = windows[w].sentences[s];
            EncodedSentence e;
            e.window = w;
            e.sentence = s;
            e.pieces = vocab.tokenize(sentence.sentence_text);
            e.ids = vocab.ids(e.pieces);
            e.alignment = align_tokens(sentence, e.pieces);
            e.piece_tags = project_labels(sentence, e.alignment);
            e.piece_id_cats.resize(e.pieces.size());
            e.piece_rel_cats.resize(e.pieces.size());
            for (std::size_t p = 0; p < e.pieces.size(); ++p) {
                std::size_t t = e.alignment.piece_to_token[p];
                e.piece_id_cats[p] = id_cats[s][t];
                e.piece_rel_cats[p] = sentence.tokens[t].relation;
            }
            out.push_back(std::move(e));
        }
    }
    return out;
}

SequenceBatch SequenceBatch::from(const std::vector<EncodedSentence>& data,
                                  const std::vector<std::size_t>& indices,
                                  int pad_id) {
    SequenceBatch b;
    b.rows = indices.size();
    for (std::size_t idx : indices)
        b.max_len = std::max(b.max_len, data[idx].ids.size());
    b.ids.assign(b.rows * b.max_len, pad_id);
    b.labels.assign(b.rows * b.max_len, -1);
    b.mask.assign(b.rows * b.max_len, 0);
    b.item = indices;
    for (std::size_t r = 0; r < b.rows; ++r) {
        const EncodedSentence& e = data[indices[r]];
        for (std::size_t i = 0; i < e.ids.size(); ++i) {
            b.ids[r * b.max_len + i] = e.ids[i];
            b.labels[r * b.max_len + i] = e.piece_tags[i];
            b.mask[r * b.max_len + i] = 1;
        }
    }
    return b;
}

std::size_t SequenceBatch::length(std::size_t row) const {
    std::size_t n = 0;
    while (n < max_len && mask[row * max_len + n] == 1) ++n;
    return n;
}

}  // namespace deft
