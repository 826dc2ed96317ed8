#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "deft/corpus.hpp"

namespace deft {

enum class CleaningMode { Frozen, Finetune };

std::string_view to_string(CleaningMode mode);
CleaningMode cleaning_mode_from(std::string_view name);

// Sentence-level cleaning: accent folding, charset filtering, formatting
// artifact removal, URL/equation handling (replaced with <url>/<equation>
// when fine-tuning, deleted when frozen), punctuation spacing. Total and
// idempotent.
std::string clean_sentence(std::string_view s, CleaningMode mode);

// Token-level cleaning for the labeling task: accent folding plus removal of
// characters outside printable ASCII. May return an empty string.
std::string clean_token_text(std::string_view s);

// Applies clean_token_text to every token; tokens (and sentences) emptied by
// cleaning are dropped and sentence texts are rebuilt.
ContextWindow clean_window(const ContextWindow& w);
std::vector<ContextWindow> clean_corpus(const std::vector<ContextWindow>& ws);

// Per-base-tag replication factors for the labeling task.
struct FactorTable {
    std::array<int, TagVocabulary::kNumBase> factors;

    static FactorTable defaults();
    static FactorTable load(const std::filesystem::path& path);

    int factor_for_base(int base) const { return factors[base]; }
    // Highest factor among the base tags present; 1 for all-O sentences.
    int sentence_factor(const SentenceRecord& s) const;
};

// Doubles the records labeled positive: originals in order, then the
// positives again in their original relative order.
std::vector<SentenceExample> balance_task1(
    const std::vector<SentenceExample>& records);

// Emits each sentence sentence_factor() times, copies contiguous.
std::vector<SentenceRecord> oversample_task2(
    const std::vector<SentenceRecord>& sentences, const FactorTable& table);

}  // namespace deft
