#include <doctest.h>

#include <set>

#include "deft/corpus.hpp"
#include "deft/error.hpp"
#include "deft/rng.hpp"
#include "test_util.hpp"

using namespace deft;

namespace {

DeftToken tok(std::string text, std::string tag, int tag_id = 0,
              std::string relation = "0") {
    DeftToken t;
    t.text = std::move(text);
    t.source = "test.deft";
    static std::int64_t offset = 0;
    t.start_char = offset;
    t.end_char = offset + static_cast<std::int64_t>(t.text.size());
    offset = t.end_char + 1;
    t.tag = *TagVocabulary::index_of(tag);
    t.tag_id = tag_id;
    t.relation = *relation_index(relation);
    return t;
}

std::string line(const std::string& text, const std::string& tag,
                 std::int64_t start, std::int64_t end) {
    return text + "\ttest.deft\t" + std::to_string(start) + "\t" +
           std::to_string(end) + "\t" + tag + "\t0\t0\t0\n";
}

// A fuzzer that emits random well-formed corpora.
std::vector<ContextWindow> random_corpus(Rng& rng, std::size_t windows) {
    const char* words[] = {"alpha", "beta", "Gamma", "delta9", "x",
                           "(",     ")",    ".",     ",",      "Epsilon"};
    std::vector<ContextWindow> out;
    std::int64_t offset = 0;
    for (std::size_t w = 0; w < windows; ++w) {
        ContextWindow win;
        win.window_id = static_cast<int>(w);
        std::vector<DeftToken> tokens;
        const std::size_t n = 1 + rng.below(12);
        for (std::size_t i = 0; i < n; ++i) {
            DeftToken t;
            t.text = words[rng.below(10)];
            t.source = "fuzz.deft";
            t.start_char = offset;
            t.end_char = offset + static_cast<std::int64_t>(t.text.size());
            offset = t.end_char + 1;
            t.tag = static_cast<int>(rng.below(TagVocabulary::kNumLabels));
            t.tag_id = static_cast<int>(rng.below(4));
            t.root_id = static_cast<int>(rng.below(3));
            t.relation = static_cast<int>(rng.below(kNumRelations));
            tokens.push_back(std::move(t));
        }
        win.sentences.push_back(make_sentence(std::move(tokens)));
        out.push_back(std::move(win));
    }
    return out;
}

std::string flatten_tags(const std::vector<ContextWindow>& ws) {
    std::string out;
    for (const auto& w : ws)
        for (const auto& s : w.sentences)
            for (const auto& t : s.tokens) {
                out += t.text + "/" + TagVocabulary::name(t.tag) + "/" +
                       std::to_string(t.start_char) + "-" +
                       std::to_string(t.end_char) + "/" +
                       std::to_string(t.tag_id) + "/" +
                       std::to_string(t.root_id) + "/" +
                       relation_labels()[t.relation] + ";";
            }
    return out;
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("reconstruct joins with spaces and records spans") {
    std::vector<DeftToken> tokens = {tok("Polarization", "O"), tok("is", "O"),
                                     tok("the", "O"), tok("separation", "O")};
    std::vector<TokenSpan> spans;
    CHECK(reconstruct_sentence(tokens, &spans) ==
          "Polarization is the separation");
    REQUIRE(spans.size() == 4);
    CHECK(spans[0].begin == 0);
    CHECK(spans[0].end == 12);
    CHECK(spans[1].begin == 13);
    CHECK(spans[1].end == 15);
    CHECK(spans[2].begin == 16);
    CHECK(spans[2].end == 19);
    CHECK(spans[3].begin == 20);
    CHECK(spans[3].end == 30);
}

TEST_CASE("reconstruct attaches punctuation") {
    CHECK(reconstruct_sentence({tok("end", "O"), tok(".", "O")}) == "end.");
    CHECK(reconstruct_sentence({tok("(", "O"), tok("see", "O"),
                                tok(")", "O")}) == "(see)");
    CHECK(reconstruct_sentence({tok("don", "O"), tok("'t", "O")}) == "don't");
}

TEST_CASE("derive_sentence_label needs a Definition-based tag") {
    auto s1 = make_sentence({tok("a", "B-Term"), tok("b", "I-Term"),
                             tok("c", "O"), tok("d", "B-Definition"),
                             tok("e", "I-Definition")});
    CHECK(derive_sentence_label(s1));
    auto s2 = make_sentence({tok("a", "O"), tok("b", "O")});
    CHECK_FALSE(derive_sentence_label(s2));
    auto s3 = make_sentence({tok("a", "B-Term"), tok("b", "I-Term")});
    CHECK_FALSE(derive_sentence_label(s3));
    auto s4 = make_sentence({tok("a", "I-Referential-Definition")});
    CHECK(derive_sentence_label(s4));
}

TEST_CASE("derive_sentence_label is order independent") {
    Rng rng(5);
    auto s = make_sentence({tok("a", "B-Definition"), tok("b", "O"),
                            tok("c", "B-Term")});
    bool expected = derive_sentence_label(s);
    for (int trial = 0; trial < 10; ++trial) {
        rng.shuffle(s.tokens);
        CHECK(derive_sentence_label(s) == expected);
    }
}

TEST_CASE("hand-built fixture of ten sentences") {
    // Five with definitions, five without; the label depends only on the
    // Definition base tag.
    const char* tags_with[] = {"B-Definition", "I-Definition",
                               "B-Referential-Definition",
                               "I-Referential-Definition", "B-Definition"};
    const char* tags_without[] = {"O", "B-Term", "I-Qualifier",
                                  "B-Referential-Term", "B-Alias-Term"};
    for (const char* tag : tags_with)
        CHECK(derive_sentence_label(make_sentence({tok("w", tag)})));
    for (const char* tag : tags_without)
        CHECK_FALSE(derive_sentence_label(make_sentence({tok("w", tag)})));
}

TEST_CASE("parse splits windows on blank lines and sentences on punctuation") {
    std::string text = line("One", "O", 0, 3) + line("sentence", "O", 4, 12) +
                       line(".", "O", 12, 13) + line("Two", "B-Term", 14, 17) +
                       line(".", "O", 17, 18) +
                       line("Three", "B-Definition", 19, 24) +
                       line(".", "O", 24, 25) + "\n" +
                       line("Second", "O", 26, 32) +
                       line("window", "O", 33, 39);
    auto windows = parse_deft_text(text, "t");
    REQUIRE(windows.size() == 2);
    CHECK(windows[0].sentences.size() == 3);
    CHECK(windows[1].sentences.size() == 1);
    CHECK(windows[0].sentences[0].sentence_text == "One sentence.");
    CHECK(windows[0].sentences[1].has_definition == false);
    CHECK(windows[0].sentences[2].has_definition == true);
}

TEST_CASE("sentence break requires capitalization or window end") {
    std::string text = line("approx", "O", 0, 6) + line(".", "O", 6, 7) +
                       line("5", "O", 8, 9) + line("units", "O", 10, 15) +
                       line(".", "O", 15, 16);
    auto windows = parse_deft_text(text, "t");
    REQUIRE(windows.size() == 1);
    // "approx . 5 units ." stays one sentence: "5" is not capitalized.
    CHECK(windows[0].sentences.size() == 1);
}

TEST_CASE("empty file parses to an empty corpus") {
    CHECK(parse_deft_text("", "t").empty());
    CHECK(parse_deft_text("\n\n\n", "t").empty());
}

TEST_CASE("parse errors carry line numbers and offending values") {
    CHECK_THROWS_WITH_AS(parse_deft_text("only\tthree\tcolumns\n", "t"),
                         doctest::Contains("line 1"), ParseError);
    CHECK_THROWS_WITH_AS(
        parse_deft_text("w\ts\tzero\t4\tO\t0\t0\t0\n", "t"),
        doctest::Contains("start_char"), ParseError);
    CHECK_THROWS_WITH_AS(
        parse_deft_text("w\ts\t0\t1\tB-Nope\t0\t0\t0\n", "t"),
        doctest::Contains("B-Nope"), ParseError);
    CHECK_THROWS_WITH_AS(
        parse_deft_text("w\ts\t5\t2\tO\t0\t0\t0\n", "t"),
        doctest::Contains("span"), ParseError);
    CHECK_THROWS_WITH_AS(
        parse_deft_text("w\ts\t0\t1\tO\t0\t0\tWeird-rel\n", "t"),
        doctest::Contains("Weird-rel"), ParseError);
}

TEST_CASE("parse-write-parse is a fixed point on fuzzed corpora") {
    Rng rng(2024);
    testutil::TempDir tmp("corpus_roundtrip");
    for (int trial = 0; trial < 25; ++trial) {
        auto corpus = random_corpus(rng, 1 + rng.below(5));
        auto path = tmp.file("roundtrip.deft");
        write_deft_file(corpus, path);
        auto reparsed = parse_deft_file(path);
        CHECK(flatten_tags(reparsed) == flatten_tags(corpus));

        // Writing the reparsed corpus yields byte-identical output.
        auto path2 = tmp.file("roundtrip2.deft");
        write_deft_file(reparsed, path2);
        CHECK(testutil::read_file(path) == testutil::read_file(path2));
    }
}

TEST_CASE("task-1 prediction lines are text TAB label") {
    testutil::TempDir tmp("pred1");
    ContextWindow w;
    w.sentences.push_back(make_sentence({tok("Terms", "O"),
                                         tok("define", "B-Definition")}));
    auto path = tmp.file("pred.tsv");
    write_predictions({w}, Task::Sentence, path);
    CHECK(testutil::read_file(path) == "Terms define\t1\n");

    write_predictions({}, Task::Sentence, path);
    CHECK(testutil::read_file(path).empty());
}

TEST_CASE("token spans are strictly increasing within a source file") {
    Rng rng(77);
    auto corpus = random_corpus(rng, 6);
    std::int64_t last_end = -1;
    for (const auto& w : corpus)
        for (const auto& s : w.sentences)
            for (const auto& t : s.tokens) {
                CHECK(t.start_char >= last_end);
                CHECK(t.end_char > t.start_char);
                last_end = t.end_char;
            }
}

TEST_CASE("sentence files round trip") {
    testutil::TempDir tmp("sentfile");
    std::vector<SentenceExample> examples = {{"a b c", true}, {"d e", false}};
    auto path = tmp.file("s.tsv");
    write_sentence_file(examples, path);
    auto back = read_sentence_file(path);
    REQUIRE(back.size() == 2);
    CHECK(back[0].text == "a b c");
    CHECK(back[0].label == true);
    CHECK(back[1].label == false);
}

}  // TEST_SUITE
