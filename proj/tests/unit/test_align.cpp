#include <doctest.h>

#include <map>

#include "deft/align.hpp"
#include "deft/error.hpp"
#include "deft/rng.hpp"

using namespace deft;

namespace {

SentenceRecord sentence(const std::vector<std::pair<std::string, std::string>>&
                            token_tag_pairs) {
    std::vector<DeftToken> tokens;
    for (const auto& [text, tag] : token_tag_pairs) {
        DeftToken t;
        t.text = text;
        t.source = "s";
        t.start_char = 0;
        t.end_char = static_cast<std::int64_t>(text.size());
        t.tag = *TagVocabulary::index_of(tag);
        tokens.push_back(std::move(t));
    }
    return make_sentence(std::move(tokens));
}

// Pieces that split each whitespace word of the text into chunks of the given
// size.
std::vector<SubwordPiece> chunk_pieces(std::string_view text,
                                       std::size_t chunk) {
    std::vector<SubwordPiece> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && text[i] == ' ') ++i;
        std::size_t start = i;
        while (i < text.size() && text[i] != ' ') ++i;
        for (std::size_t c = start; c < i; c += chunk) {
            std::size_t e = std::min(i, c + chunk);
            out.push_back({std::string(text.substr(c, e - c)), c, e});
        }
    }
    return out;
}

int label(const char* name) { return *TagVocabulary::index_of(name); }

}  // namespace

TEST_SUITE("align") {

TEST_CASE("one token, one piece") {
    auto s = sentence({{"word", "B-Term"}});
    std::vector<SubwordPiece> pieces = {{"word", 0, 4}};
    auto a = align_tokens(s, pieces);
    REQUIRE(a.piece_to_token.size() == 1);
    CHECK(a.piece_to_token[0] == 0);
    CHECK(a.token_pieces[0].first == 0);
    CHECK(a.token_pieces[0].second == 1);
}

TEST_CASE("a three-piece word maps back to its token") {
    auto s = sentence({{"we", "O"}, {"extrapolate", "B-Term"}, {"it", "O"}});
    // "we extrapolate it": split "extrapolate" (span [3,14)) into 3 pieces.
    std::vector<SubwordPiece> pieces = {{"we", 0, 2},   {"extr", 3, 7},
                                        {"apol", 7, 11}, {"ate", 11, 14},
                                        {"it", 15, 17}};
    auto a = align_tokens(s, pieces);
    CHECK(a.token_pieces[1].first == 1);
    CHECK(a.token_pieces[1].second == 4);
    CHECK(a.piece_to_token[2] == 1);
}

TEST_CASE("a piece crossing a token boundary is an alignment error") {
    auto s = sentence({{"end", "O"}, {".", "O"}});  // text "end."
    std::vector<SubwordPiece> bad = {{"en", 0, 2}, {"d.", 2, 4}};
    CHECK_THROWS_AS(align_tokens(s, bad), DataError);
}

TEST_CASE("every token must receive a piece") {
    auto s = sentence({{"end", "O"}, {".", "O"}});
    std::vector<SubwordPiece> missing = {{"end", 0, 3}};
    CHECK_THROWS_AS(align_tokens(s, missing), DataError);
}

TEST_CASE("projection expands B-X into B-X I-X I-X") {
    auto s = sentence({{"extrapolate", "B-Term"}});
    auto pieces = chunk_pieces(s.sentence_text, 4);
    auto a = align_tokens(s, pieces);
    auto labels = project_labels(s, a);
    REQUIRE(labels.size() == 3);
    CHECK(labels[0] == label("B-Term"));
    CHECK(labels[1] == label("I-Term"));
    CHECK(labels[2] == label("I-Term"));
}

TEST_CASE("projection repeats O and I-X labels") {
    auto s = sentence({{"something", "O"}, {"borrowed", "I-Definition"}});
    auto pieces = chunk_pieces(s.sentence_text, 5);
    auto a = align_tokens(s, pieces);
    auto labels = project_labels(s, a);
    REQUIRE(labels.size() == 4);
    CHECK(labels[0] == label("O"));
    CHECK(labels[1] == label("O"));
    CHECK(labels[2] == label("I-Definition"));
    CHECK(labels[3] == label("I-Definition"));
}

TEST_CASE("majority label wins") {
    auto s = sentence({{"extrapolate", "B-Term"}});
    auto pieces = chunk_pieces(s.sentence_text, 4);
    auto a = align_tokens(s, pieces);
    auto out = resolve_labels(
        {label("B-Term"), label("B-Term"), label("I-Definition")}, a);
    REQUIRE(out.size() == 1);
    CHECK(out[0] == label("B-Term"));
}

TEST_CASE("ties fall to the first piece") {
    auto s = sentence({{"ambiguous", "O"}});
    auto pieces = chunk_pieces(s.sentence_text, 5);  // two pieces
    auto a = align_tokens(s, pieces);
    auto out =
        resolve_labels({label("I-Qualifier"), label("B-Definition")}, a);
    CHECK(out[0] == label("I-Qualifier"));
}

TEST_CASE("a unique maximum beats a non-maximal first piece") {
    auto s = sentence({{"abcdefghi", "O"}});
    auto pieces = chunk_pieces(s.sentence_text, 3);  // three pieces
    auto a = align_tokens(s, pieces);
    auto out = resolve_labels(
        {label("O"), label("B-Term"), label("B-Term")}, a);
    CHECK(out[0] == label("B-Term"));
}

TEST_CASE("single-piece tokens keep their label") {
    auto s = sentence({{"x", "O"}});
    auto a = align_tokens(s, {{"x", 0, 1}});
    CHECK(resolve_labels({label("I-Qualifier")}, a)[0] == label("I-Qualifier"));
}

TEST_CASE("resolve then project is the identity on token labels") {
    Rng rng(64);
    const char* texts[] = {"alpha", "be", "gamma11", "dee", "ee", "effective"};
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::pair<std::string, std::string>> toks;
        const std::size_t n = 1 + rng.below(8);
        for (std::size_t i = 0; i < n; ++i)
            toks.emplace_back(
                texts[rng.below(6)],
                TagVocabulary::labels()[rng.below(TagVocabulary::kNumLabels)]);
        auto s = sentence(toks);
        auto pieces = chunk_pieces(s.sentence_text, 1 + rng.below(4));
        auto a = align_tokens(s, pieces);

        // Coverage oracle: spans tile the tokens, every token covered.
        for (std::size_t t = 0; t < s.tokens.size(); ++t) {
            auto [first, last] = a.token_pieces[t];
            REQUIRE(first < last);
            CHECK(pieces[first].begin == s.token_spans[t].begin);
            CHECK(pieces[last - 1].end == s.token_spans[t].end);
            for (std::size_t p = first + 1; p < last; ++p)
                CHECK(pieces[p].begin == pieces[p - 1].end);
        }

        auto projected = project_labels(s, a);
        auto resolved = resolve_labels(projected, a);
        REQUIRE(resolved.size() == s.tokens.size());
        for (std::size_t t = 0; t < s.tokens.size(); ++t)
            CHECK(resolved[t] == s.tokens[t].tag);
    }
}

TEST_CASE("resolution depends only on the multiset plus the first piece") {
    auto s = sentence({{"abcdefgh", "O"}});
    auto pieces = chunk_pieces(s.sentence_text, 2);  // four pieces
    auto a = align_tokens(s, pieces);
    std::vector<int> labels1 = {label("B-Term"), label("O"),
                                label("B-Term"), label("I-Definition")};
    std::vector<int> labels2 = {label("B-Term"), label("I-Definition"),
                                label("O"), label("B-Term")};
    CHECK(resolve_labels(labels1, a) == resolve_labels(labels2, a));
}

}  // TEST_SUITE
