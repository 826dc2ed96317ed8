#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "deft/labels.hpp"

namespace deft {

// One annotated token, i.e. one 8-column line of a corpus file:
// token, source, start_char, end_char, tag, tag_id, root_id, relation.
struct DeftToken {
    std::string text;
    std::string source;
    std::int64_t start_char = 0;
    std::int64_t end_char = 0;
    int tag = TagVocabulary::kOutside;  // index into TagVocabulary::labels()
    int tag_id = 0;                     // 0 = none
    int root_id = 0;                    // 0 = none
    int relation = 0;                   // index into relation_labels(), 0 = none
};

struct TokenSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
};

struct SentenceRecord {
    std::vector<DeftToken> tokens;
    std::string sentence_text;           // detokenized join of the token texts
    std::vector<TokenSpan> token_spans;  // span of each token in sentence_text
    bool has_definition = false;
};

struct ContextWindow {
    std::vector<SentenceRecord> sentences;
    int window_id = 0;
};

enum class Task { Sentence = 1, Tokens = 2, Multitask = 3 };

// Punctuation attachment used by detokenization and by sentence cleaning.
bool attaches_left(std::string_view token);   // . , ; : ! ? ) ] '
bool attaches_right(std::string_view token);  // ( [

// Joins token texts with single spaces, dropping the space before
// left-attaching and after right-attaching punctuation. Optionally records the
// character span each piece occupies in the result.
std::string join_tokens(const std::vector<std::string_view>& texts,
                        std::vector<TokenSpan>* spans = nullptr);

std::string reconstruct_sentence(const std::vector<DeftToken>& tokens,
                                 std::vector<TokenSpan>* spans = nullptr);

// True iff any token carries a Definition-based tag.
bool derive_sentence_label(const SentenceRecord& s);

// Builds a SentenceRecord (text, spans, label) from its tokens.
SentenceRecord make_sentence(std::vector<DeftToken> tokens);

std::vector<ContextWindow> parse_deft_file(const std::filesystem::path& path);
std::vector<ContextWindow> parse_deft_text(std::string_view text,
                                           std::string_view origin);

void write_deft_file(const std::vector<ContextWindow>& windows,
                     const std::filesystem::path& path);

// Task 1 -> "sentence_text \t 0|1" per sentence, task 2 -> 8-column layout.
void write_predictions(const std::vector<ContextWindow>& windows, Task task,
                       const std::filesystem::path& path);

// Two-column sentence/label file used by the sentence-classification task.
struct SentenceExample {
    std::string text;
    bool label = false;
};

std::vector<SentenceExample> read_sentence_file(
    const std::filesystem::path& path);
void write_sentence_file(const std::vector<SentenceExample>& examples,
                         const std::filesystem::path& path);

}  // namespace deft
