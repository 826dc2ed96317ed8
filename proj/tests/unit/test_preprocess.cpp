#include <doctest.h>

#include <map>

#include "deft/error.hpp"
#include "deft/preprocess.hpp"
#include "deft/rng.hpp"
#include "test_util.hpp"

using namespace deft;

namespace {

DeftToken tagged(std::string text, const std::string& tag) {
    DeftToken t;
    t.text = std::move(text);
    t.source = "s";
    t.start_char = 0;
    t.end_char = static_cast<std::int64_t>(t.text.size());
    t.tag = *TagVocabulary::index_of(tag);
    return t;
}

SentenceRecord sentence_with(const std::vector<std::string>& tags) {
    std::vector<DeftToken> tokens;
    for (std::size_t i = 0; i < tags.size(); ++i)
        tokens.push_back(tagged("w" + std::to_string(i), tags[i]));
    return make_sentence(std::move(tokens));
}

std::map<std::string, std::size_t> tag_counts(
    const std::vector<SentenceRecord>& sentences) {
    std::map<std::string, std::size_t> counts;
    for (const auto& s : sentences)
        for (const auto& t : s.tokens) {
            int base = TagVocabulary::base_of(t.tag);
            if (base >= 0) ++counts[TagVocabulary::base_labels()[base]];
        }
    return counts;
}

}  // namespace

TEST_SUITE("preprocess") {

TEST_CASE("urls become <url> when fine-tuning and vanish when frozen") {
    CHECK(clean_sentence("see http://x.y/z here", CleaningMode::Finetune) ==
          "see <url> here");
    CHECK(clean_sentence("see http://x.y/z here", CleaningMode::Frozen) ==
          "see here");
    CHECK(clean_sentence("at www.example.org now", CleaningMode::Finetune) ==
          "at <url> now");
    CHECK(clean_sentence("ftp://host/file", CleaningMode::Frozen).empty());
}

TEST_CASE("accents fold to their unaccented versions") {
    CHECK(clean_sentence("café", CleaningMode::Finetune) == "cafe");
    CHECK(clean_sentence("Ångström naïve Œuvre", CleaningMode::Frozen) ==
          "Angstrom naive OEuvre");
    CHECK(clean_token_text("séñor") == "senor");
}

TEST_CASE("characters outside printable ascii are discarded") {
    CHECK(clean_token_text("90º") == "90");
    CHECK(clean_token_text("αβγ").empty());
    CHECK(clean_sentence("x \xe2\x88\x91 y", CleaningMode::Finetune) == "x y");
}

TEST_CASE("formatting artifacts of the size-NN brace family are removed") {
    CHECK(clean_sentence("before size 12 { } after", CleaningMode::Finetune) ==
          "before after");
    CHECK(clean_sentence("a size 8 {x y} b", CleaningMode::Frozen) == "a b");
}

TEST_CASE("equations collapse to a single token or disappear") {
    CHECK(clean_sentence("we get a = b + c end", CleaningMode::Finetune) ==
          "we get a <equation> end");
    CHECK(clean_sentence("we get a = b + c end", CleaningMode::Frozen) ==
          "we get a end");
    CHECK(clean_sentence("x^2 alone", CleaningMode::Frozen) == "alone");
}

TEST_CASE("spaces before punctuation are removed") {
    CHECK(clean_sentence("the end .", CleaningMode::Finetune) == "the end.");
    CHECK(clean_sentence("pairs ( x ) listed", CleaningMode::Frozen) ==
          "pairs (x) listed");
}

TEST_CASE("cleaning is total and idempotent") {
    CHECK(clean_sentence("", CleaningMode::Finetune).empty());
    Rng rng(99);
    const char* pieces[] = {"word",  "Café", "http://a.b", "x+y=z", ".",
                            "(",     ")",    "size 12 { }", "º",    "énd",
                            "www.q", ",",   "plain"};
    for (int trial = 0; trial < 200; ++trial) {
        std::string s;
        const std::size_t n = rng.below(10);
        for (std::size_t i = 0; i < n; ++i) {
            if (i > 0) s += ' ';
            s += pieces[rng.below(13)];
        }
        for (CleaningMode mode :
             {CleaningMode::Frozen, CleaningMode::Finetune}) {
            std::string once = clean_sentence(s, mode);
            CHECK(clean_sentence(once, mode) == once);
        }
    }
}

TEST_CASE("task-1 balancing doubles the positives in order") {
    std::vector<SentenceExample> records = {
        {"p1", true}, {"n1", false}, {"p2", true},  {"n2", false},
        {"p3", true}, {"n3", false}, {"n4", false},
    };
    auto out = balance_task1(records);
    std::size_t pos = 0, neg = 0;
    for (const auto& r : out) (r.label ? pos : neg)++;
    CHECK(pos == 6);
    CHECK(neg == 7);
    // Originals in order, then the duplicated positives in order.
    CHECK(out.size() == 10);
    CHECK(out[7].text == "p1");
    CHECK(out[8].text == "p2");
    CHECK(out[9].text == "p3");
}

TEST_CASE("balancing with no positives changes nothing") {
    std::vector<SentenceExample> records = {{"a", false}, {"b", false}};
    auto out = balance_task1(records);
    CHECK(out.size() == 2);
}

TEST_CASE("balancing invariant: positives double exactly") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<SentenceExample> records;
        const std::size_t n = rng.below(100);
        std::size_t pos = 0;
        for (std::size_t i = 0; i < n; ++i) {
            bool label = rng.below(3) == 0;
            pos += label ? 1 : 0;
            records.push_back({"s" + std::to_string(i), label});
        }
        auto out = balance_task1(records);
        std::size_t out_pos = 0;
        for (const auto& r : out) out_pos += r.label ? 1 : 0;
        CHECK(out_pos == 2 * pos);
        CHECK(out.size() - out_pos == records.size() - pos);
    }
}

TEST_CASE("factor table defaults follow the per-tag multipliers") {
    FactorTable t = FactorTable::defaults();
    const auto& bases = TagVocabulary::base_labels();
    std::map<std::string, int> expect = {
        {"Definition", 1},       {"Term", 1},
        {"Alias-Term", 4},       {"Qualifier", 4},
        {"Referential-Definition", 8}, {"Referential-Term", 16}};
    for (int b = 0; b < TagVocabulary::kNumBase; ++b)
        CHECK(t.factor_for_base(b) == expect[bases[b]]);
}

TEST_CASE("factor table loads overrides and rejects junk") {
    testutil::TempDir tmp("factors");
    testutil::write_file(tmp.file("f.cfg"),
                         "# comment\nQualifier = 9\nTerm=2\n");
    FactorTable t = FactorTable::load(tmp.file("f.cfg"));
    CHECK(t.factor_for_base(5) == 9);  // Qualifier
    CHECK(t.factor_for_base(0) == 2);  // Term
    CHECK(t.factor_for_base(2) == 16); // Referential-Term untouched

    testutil::write_file(tmp.file("bad.cfg"), "NotATag = 3\n");
    CHECK_THROWS_AS(FactorTable::load(tmp.file("bad.cfg")), ConfigError);
    testutil::write_file(tmp.file("bad2.cfg"), "Term = 0\n");
    CHECK_THROWS_AS(FactorTable::load(tmp.file("bad2.cfg")), ConfigError);
}

TEST_CASE("sentence factor takes the maximal factor present") {
    FactorTable t = FactorTable::defaults();
    CHECK(t.sentence_factor(sentence_with({"O", "O"})) == 1);
    CHECK(t.sentence_factor(sentence_with({"B-Term", "B-Definition"})) == 1);
    CHECK(t.sentence_factor(sentence_with(
              {"B-Qualifier", "B-Referential-Definition"})) == 8);
    CHECK(t.sentence_factor(sentence_with({"O", "I-Referential-Term"})) == 16);
}

TEST_CASE("oversampling replicates by the sentence factor, contiguously") {
    FactorTable t = FactorTable::defaults();
    std::vector<SentenceRecord> corpus = {
        sentence_with({"B-Term", "O"}),
        sentence_with({"B-Qualifier", "B-Referential-Definition"}),
        sentence_with({"O"}),
    };
    auto out = oversample_task2(corpus, t);
    REQUIRE(out.size() == 1 + 8 + 1);
    CHECK(out[0].tokens[0].tag == *TagVocabulary::index_of("B-Term"));
    for (int k = 1; k <= 8; ++k)
        CHECK(out[static_cast<std::size_t>(k)].tokens[0].tag ==
              *TagVocabulary::index_of("B-Qualifier"));
}

TEST_CASE("the uniquely maximal tag multiplies exactly; others at least") {
    // 256 Referential-Term occurrences mirroring the corpus statistics; other
    // tags ride along in some of those sentences.
    FactorTable t = FactorTable::defaults();
    std::vector<SentenceRecord> corpus;
    for (int i = 0; i < 256; ++i) {
        std::vector<std::string> tags = {"B-Referential-Term", "O"};
        if (i % 2 == 0) tags.push_back("B-Term");
        if (i % 8 == 0) tags.push_back("B-Qualifier");
        corpus.push_back(sentence_with(tags));
    }
    for (int i = 0; i < 100; ++i)
        corpus.push_back(sentence_with({"B-Definition", "B-Term"}));
    for (int i = 0; i < 40; ++i)
        corpus.push_back(sentence_with({"B-Qualifier"}));

    const auto before = tag_counts(corpus);
    const auto after = tag_counts(oversample_task2(corpus, t));

    CHECK(before.at("Referential-Term") == 256);
    CHECK(after.at("Referential-Term") == 4096);  // exactly 16x
    const std::map<std::string, int> factor = {
        {"Definition", 1},       {"Term", 1},
        {"Alias-Term", 4},       {"Qualifier", 4},
        {"Referential-Definition", 8}, {"Referential-Term", 16}};
    for (const auto& [tag, count] : before) {
        CHECK(after.at(tag) >=
              static_cast<std::size_t>(factor.at(tag)) * count);
    }
}

TEST_CASE("recount oracle on a fuzzed corpus") {
    Rng rng(17);
    FactorTable t = FactorTable::defaults();
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<SentenceRecord> corpus;
        const std::size_t n = 1 + rng.below(40);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<std::string> tags;
            const std::size_t len = 1 + rng.below(6);
            for (std::size_t k = 0; k < len; ++k)
                tags.push_back(TagVocabulary::labels()[rng.below(
                    TagVocabulary::kNumLabels)]);
            corpus.push_back(sentence_with(tags));
        }
        auto out = oversample_task2(corpus, t);

        // Independent recount: each sentence must appear exactly max-factor
        // times.
        std::size_t expected = 0;
        for (const auto& s : corpus)
            expected += static_cast<std::size_t>(t.sentence_factor(s));
        CHECK(out.size() == expected);

        const auto before = tag_counts(corpus);
        const auto after = tag_counts(out);
        for (const auto& [tag, count] : before) {
            auto it = std::find(TagVocabulary::base_labels().begin(),
                                TagVocabulary::base_labels().end(), tag);
            int f = t.factor_for_base(static_cast<int>(
                it - TagVocabulary::base_labels().begin()));
            CHECK(after.at(tag) >= static_cast<std::size_t>(f) * count);
        }
    }
}

TEST_CASE("token cleaning drops emptied tokens and rebuilds sentences") {
    ContextWindow w;
    std::vector<DeftToken> tokens = {tagged("Polarizati∞n", "B-Term"),
                                     tagged("αβ", "O"), tagged("is", "O")};
    w.sentences.push_back(make_sentence(std::move(tokens)));
    ContextWindow cleaned = clean_window(w);
    REQUIRE(cleaned.sentences.size() == 1);
    REQUIRE(cleaned.sentences[0].tokens.size() == 2);
    CHECK(cleaned.sentences[0].tokens[0].text == "Polarizatin");
    CHECK(cleaned.sentences[0].sentence_text == "Polarizatin is");
}

}  // TEST_SUITE
