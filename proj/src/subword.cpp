#include "deft/subword.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <map>

#include "deft/error.hpp"
#include "deft/rng.hpp"

namespace deft {

namespace {

const std::vector<std::string>& specials() {
    static const std::vector<std::string> s = {
        std::string(SubwordVocabulary::kUrl),
        std::string(SubwordVocabulary::kEquation),
        std::string(SubwordVocabulary::kUnknown),
        std::string(SubwordVocabulary::kPadding),
        std::string(SubwordVocabulary::kSequenceStart)};
    return s;
}

bool is_special(std::string_view word) {
    for (const auto& s : specials())
        if (word == s) return true;
    return false;
}

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

struct Unit {
    std::string text;
    std::size_t begin = 0;  // offset within the enclosing string
};

// Splits a word into alphanumeric runs and single punctuation characters.
// Merges never cross these boundaries, so no piece can span the junction
// where detokenization glued punctuation onto a neighbouring token.
std::vector<Unit> pretokenize(std::string_view word, std::size_t word_begin) {
    std::vector<Unit> units;
    std::size_t i = 0;
    while (i < word.size()) {
        std::size_t start = i;
        if (is_word_char(word[i])) {
            while (i < word.size() && is_word_char(word[i])) ++i;
        } else {
            ++i;
        }
        units.push_back(
            {std::string(word.substr(start, i - start)), word_begin + start});
    }
    return units;
}

struct Word {
    std::string_view text;
    std::size_t begin;
};

std::vector<Word> split_words(std::string_view s) {
    std::vector<Word> words;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        std::size_t start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
        if (i > start) words.push_back({s.substr(start, i - start), start});
    }
    return words;
}

void merge_in_place(std::vector<std::string>& symbols, const std::string& left,
                    const std::string& right) {
    std::size_t w = 0;
    for (std::size_t i = 0; i < symbols.size();) {
        if (i + 1 < symbols.size() && symbols[i] == left &&
            symbols[i + 1] == right) {
            symbols[w++] = left + right;
            i += 2;
        } else {
            symbols[w++] = std::move(symbols[i]);
            ++i;
        }
    }
    symbols.resize(w);
}

}  // namespace

void SubwordVocabulary::add_piece(std::string piece) {
    index_.emplace(piece, static_cast<int>(pieces_.size()));
    pieces_.push_back(std::move(piece));
}

void SubwordVocabulary::finish_init() {
    unk_id_ = id_of(kUnknown);
    pad_id_ = id_of(kPadding);
    seq_start_id_ = id_of(kSequenceStart);
}

int SubwordVocabulary::id_of(std::string_view piece) const {
    auto it = index_.find(std::string(piece));
    return it == index_.end() ? -1 : it->second;
}

SubwordVocabulary SubwordVocabulary::build(
    const std::vector<std::string>& corpus, std::size_t size) {
    if (size < kMinSize)
        throw ConfigError("vocabulary size " + std::to_string(size) +
                          " is below the minimum " + std::to_string(kMinSize));

    SubwordVocabulary v;
    for (const auto& s : specials()) v.add_piece(s);
    for (int c = 0x20; c <= 0x7E; ++c)
        v.add_piece(std::string(1, static_cast<char>(c)));

    // Unit frequencies over the corpus; units start as character sequences.
    std::map<std::string, long> unit_freq;
    for (const auto& line : corpus)
        for (const auto& word : split_words(line)) {
            if (is_special(word.text)) continue;
            for (const auto& unit : pretokenize(word.text, 0))
                ++unit_freq[unit.text];
        }

    std::vector<std::pair<std::vector<std::string>, long>> units;
    units.reserve(unit_freq.size());
    for (const auto& [text, freq] : unit_freq) {
        std::vector<std::string> symbols;
        symbols.reserve(text.size());
        for (char c : text) symbols.emplace_back(1, c);
        units.emplace_back(std::move(symbols), freq);
    }

    while (v.pieces_.size() < size) {
        // Ordered map: the first maximal entry is the lexicographically
        // smallest pair, which is the tie rule.
        std::map<std::pair<std::string, std::string>, long> pair_freq;
        for (const auto& [symbols, freq] : units)
            for (std::size_t i = 0; i + 1 < symbols.size(); ++i)
                pair_freq[{symbols[i], symbols[i + 1]}] += freq;
        if (pair_freq.empty()) break;

        const std::pair<std::string, std::string>* best = nullptr;
        long best_count = 0;
        for (const auto& [pair, count] : pair_freq)
            if (count > best_count) {
                best = &pair;
                best_count = count;
            }

        std::string merged = best->first + best->second;
        if (v.id_of(merged) >= 0) {
            // Already a piece (can happen when a special collides); drop the
            // pair by merging it everywhere without adding a new entry.
            for (auto& [symbols, freq] : units)
                merge_in_place(symbols, best->first, best->second);
            continue;
        }
        for (auto& [symbols, freq] : units)
            merge_in_place(symbols, best->first, best->second);
        v.add_piece(std::move(merged));
    }

    v.finish_init();
    return v;
}

SubwordVocabulary SubwordVocabulary::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path.string() + "'");
    SubwordVocabulary v;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty())
            throw ParseError(path.string() + ": empty vocabulary line " +
                             std::to_string(v.pieces_.size() + 1));
        if (v.id_of(line) >= 0)
            throw ParseError(path.string() + ": duplicate piece '" + line + "'");
        v.add_piece(line);
    }
    for (std::size_t i = 0; i < specials().size(); ++i)
        if (i >= v.pieces_.size() || v.pieces_[i] != specials()[i])
            throw ParseError(path.string() +
                             ": vocabulary does not start with the special "
                             "pieces");
    v.finish_init();
    return v;
}

void SubwordVocabulary::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    for (const auto& p : pieces_) out << p << '\n';
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::uint64_t SubwordVocabulary::content_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& p : pieces_) {
        for (unsigned char c : p) {
            h ^= c;
            h *= 0x100000001b3ull;
        }
        h ^= static_cast<unsigned char>('\n');
        h *= 0x100000001b3ull;
    }
    return h;
}

std::vector<SubwordPiece> SubwordVocabulary::tokenize(std::string_view s) const {
    std::vector<SubwordPiece> out;
    for (const auto& word : split_words(s)) {
        if (is_special(word.text)) {
            out.push_back({std::string(word.text), word.begin,
                           word.begin + word.text.size()});
            continue;
        }
        for (const auto& unit : pretokenize(word.text, word.begin)) {
            // Start from single characters; unknown characters become <unk>.
            std::vector<SubwordPiece> symbols;
            symbols.reserve(unit.text.size());
            for (std::size_t i = 0; i < unit.text.size(); ++i) {
                std::string ch(1, unit.text[i]);
                if (id_of(ch) < 0) ch = std::string(kUnknown);
                symbols.push_back({std::move(ch), unit.begin + i,
                                   unit.begin + i + 1});
            }
            // Repeatedly merge the adjacent pair whose concatenation has the
            // best rank; leftmost occurrence first.
            while (symbols.size() > 1) {
                int best_rank = std::numeric_limits<int>::max();
                std::size_t best_i = 0;
                for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
                    int rank = id_of(symbols[i].text + symbols[i + 1].text);
                    if (rank >= 0 && rank < best_rank) {
                        best_rank = rank;
                        best_i = i;
                    }
                }
                if (best_rank == std::numeric_limits<int>::max()) break;
                symbols[best_i].text += symbols[best_i + 1].text;
                symbols[best_i].end = symbols[best_i + 1].end;
                symbols.erase(symbols.begin() +
                              static_cast<std::ptrdiff_t>(best_i) + 1);
            }
            out.insert(out.end(), symbols.begin(), symbols.end());
        }
    }
    return out;
}

std::vector<int> SubwordVocabulary::ids(
    const std::vector<SubwordPiece>& pieces) const {
    std::vector<int> out;
    out.reserve(pieces.size());
    for (const auto& p : pieces) {
        int id = id_of(p.text);
        out.push_back(id >= 0 ? id : unk_id_);
    }
    return out;
}

}  // namespace deft
