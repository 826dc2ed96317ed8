#include "deft/preprocess.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <regex>
#include <string>

#include "deft/error.hpp"

namespace deft {

namespace {

// Latin-1 supplement 0xC0..0xFF.
const char* const kLatin1Fold[64] = {
    "A", "A", "A", "A", "A", "A", "AE", "C",  // C0-C7
    "E", "E", "E", "E", "I", "I", "I",  "I",  // C8-CF
    "D", "N", "O", "O", "O", "O", "O",  "",   // D0-D7 (D7 is the times sign)
    "O", "U", "U", "U", "U", "Y", "TH", "ss", // D8-DF
    "a", "a", "a", "a", "a", "a", "ae", "c",  // E0-E7
    "e", "e", "e", "e", "i", "i", "i",  "i",  // E8-EF
    "d", "n", "o", "o", "o", "o", "o",  "",   // F0-F7 (F7 is the division sign)
    "o", "u", "u", "u", "u", "y", "th", "y",  // F8-FF
};

// Latin extended-A 0x100..0x17F.
const char* const kLatinExtAFold[128] = {
    "A", "a", "A", "a", "A", "a", "C", "c", "C", "c", "C", "c", "C", "c",  // 100-10D
    "D", "d", "D", "d",                                                    // 10E-111
    "E", "e", "E", "e", "E", "e", "E", "e", "E", "e",                      // 112-11B
    "G", "g", "G", "g", "G", "g", "G", "g",                                // 11C-123
    "H", "h", "H", "h",                                                    // 124-127
    "I", "i", "I", "i", "I", "i", "I", "i", "I", "i",                      // 128-131
    "IJ", "ij", "J", "j", "K", "k", "k",                                   // 132-138
    "L", "l", "L", "l", "L", "l", "L", "l", "L", "l",                      // 139-142
    "N", "n", "N", "n", "N", "n", "n", "N", "n",                           // 143-14B
    "O", "o", "O", "o", "O", "o", "OE", "oe",                              // 14C-153
    "R", "r", "R", "r", "R", "r",                                          // 154-159
    "S", "s", "S", "s", "S", "s", "S", "s",                                // 15A-161
    "T", "t", "T", "t", "T", "t",                                          // 162-167
    "U", "u", "U", "u", "U", "u", "U", "u", "U", "u", "U", "u",            // 168-173
    "W", "w", "Y", "y", "Y",                                               // 174-178
    "Z", "z", "Z", "z", "Z", "z", "s",                                     // 179-17F
};

const char* fold_codepoint(std::uint32_t cp) {
    if (cp >= 0xC0 && cp <= 0xFF) return kLatin1Fold[cp - 0xC0];
    if (cp >= 0x100 && cp <= 0x17F) return kLatinExtAFold[cp - 0x100];
    return nullptr;
}

std::uint32_t next_codepoint(std::string_view s, std::size_t& i) {
    const auto byte = [&](std::size_t k) {
        return static_cast<std::uint32_t>(static_cast<unsigned char>(s[k]));
    };
    std::uint32_t b0 = byte(i);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    auto cont = [&](std::size_t k) {
        return k < s.size() && (byte(k) & 0xC0u) == 0x80u;
    };
    if ((b0 & 0xE0u) == 0xC0u && cont(i + 1)) {
        std::uint32_t cp = ((b0 & 0x1Fu) << 6) | (byte(i + 1) & 0x3Fu);
        i += 2;
        return cp;
    }
    if ((b0 & 0xF0u) == 0xE0u && cont(i + 1) && cont(i + 2)) {
        std::uint32_t cp = ((b0 & 0x0Fu) << 12) | ((byte(i + 1) & 0x3Fu) << 6) |
                           (byte(i + 2) & 0x3Fu);
        i += 3;
        return cp;
    }
    if ((b0 & 0xF8u) == 0xF0u && cont(i + 1) && cont(i + 2) && cont(i + 3)) {
        std::uint32_t cp = ((b0 & 0x07u) << 18) | ((byte(i + 1) & 0x3Fu) << 12) |
                           ((byte(i + 2) & 0x3Fu) << 6) | (byte(i + 3) & 0x3Fu);
        i += 4;
        return cp;
    }
    ++i;  // invalid byte; dropped by the charset filter
    return 0xFFFD;
}

std::string fold_accents(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        std::size_t start = i;
        std::uint32_t cp = next_codepoint(s, i);
        if (cp < 0x80) {
            out += s[start];
            continue;
        }
        if (const char* folded = fold_codepoint(cp)) {
            out += folded;
        } else {
            out.append(s.substr(start, i - start));
        }
    }
    return out;
}

std::string filter_printable_ascii(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v')
            out += ' ';
        else if (c >= 0x20 && c <= 0x7E)
            out += c;
    }
    return out;
}

// Text-formatting leftovers of the "size 12 { }" family, with or without
// escaped braces.
std::string strip_format_artifacts(const std::string& s) {
    static const std::regex pattern(R"(size\s+\d+\s*\\?\{[^{}]*\\?\})");
    return std::regex_replace(s, pattern, "");
}

std::vector<std::string_view> split_whitespace(std::string_view s) {
    std::vector<std::string_view> words;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && s[i] == ' ') ++i;
        std::size_t start = i;
        while (i < s.size() && s[i] != ' ') ++i;
        if (i > start) words.push_back(s.substr(start, i - start));
    }
    return words;
}

bool is_url_start(std::string_view s, std::size_t i) {
    static constexpr std::string_view kPrefixes[] = {"http://", "https://",
                                                     "ftp://", "www."};
    for (auto p : kPrefixes)
        if (s.substr(i, p.size()) == p) return true;
    return false;
}

std::string replace_urls(std::string_view s, CleaningMode mode) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (is_url_start(s, i)) {
            while (i < s.size() && s[i] != ' ') ++i;  // consume to whitespace
            if (mode == CleaningMode::Finetune) out += "<url>";
        } else {
            out += s[i++];
        }
    }
    return out;
}

bool looks_like_equation(std::string_view word) {
    return word.find_first_of("=+^\\") != std::string_view::npos;
}

std::string replace_equations(std::string_view s, CleaningMode mode) {
    auto words = split_whitespace(s);
    std::string out;
    out.reserve(s.size());
    bool in_equation = false;
    for (auto w : words) {
        if (looks_like_equation(w)) {
            if (!in_equation && mode == CleaningMode::Finetune) {
                if (!out.empty()) out += ' ';
                out += "<equation>";
            }
            in_equation = true;  // adjacent equation words collapse into one
            continue;
        }
        in_equation = false;
        if (!out.empty()) out += ' ';
        out += w;
    }
    return out;
}

std::string normalize_spacing(std::string_view s) {
    auto words = split_whitespace(s);
    std::vector<std::string_view> views(words.begin(), words.end());
    return join_tokens(views);
}

}  // namespace

std::string_view to_string(CleaningMode mode) {
    return mode == CleaningMode::Frozen ? "frozen" : "finetune";
}

CleaningMode cleaning_mode_from(std::string_view name) {
    if (name == "frozen") return CleaningMode::Frozen;
    if (name == "finetune") return CleaningMode::Finetune;
    throw ConfigError("unknown mode '" + std::string(name) +
                      "' (expected frozen or finetune)");
}

std::string clean_sentence(std::string_view s, CleaningMode mode) {
    std::string folded = fold_accents(s);
    std::string ascii = filter_printable_ascii(folded);
    std::string stripped = strip_format_artifacts(ascii);
    std::string joined = normalize_spacing(stripped);
    std::string no_urls = replace_urls(joined, mode);
    return replace_equations(no_urls, mode);
}

std::string clean_token_text(std::string_view s) {
    return filter_printable_ascii(fold_accents(s));
}

ContextWindow clean_window(const ContextWindow& w) {
    ContextWindow out;
    out.window_id = w.window_id;
    for (const auto& sentence : w.sentences) {
        std::vector<DeftToken> kept;
        kept.reserve(sentence.tokens.size());
        for (const auto& token : sentence.tokens) {
            DeftToken t = token;
            t.text = clean_token_text(t.text);
            if (!t.text.empty()) kept.push_back(std::move(t));
        }
        if (!kept.empty()) out.sentences.push_back(make_sentence(std::move(kept)));
    }
    return out;
}

std::vector<ContextWindow> clean_corpus(const std::vector<ContextWindow>& ws) {
    std::vector<ContextWindow> out;
    out.reserve(ws.size());
    for (const auto& w : ws) {
        ContextWindow cleaned = clean_window(w);
        if (!cleaned.sentences.empty()) out.push_back(std::move(cleaned));
    }
    return out;
}

FactorTable FactorTable::defaults() {
    // Base order: Term, Alias-Term, Referential-Term, Definition,
    // Referential-Definition, Qualifier.
    return FactorTable{{1, 4, 16, 1, 8, 4}};
}

FactorTable FactorTable::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read '" + path.string() + "'");
    FactorTable table = defaults();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string_view view = line;
        auto trim = [](std::string_view v) {
            while (!v.empty() && (v.front() == ' ' || v.front() == '\t'))
                v.remove_prefix(1);
            while (!v.empty() && (v.back() == ' ' || v.back() == '\t'))
                v.remove_suffix(1);
            return v;
        };
        view = trim(view);
        if (view.empty() || view.front() == '#') continue;
        std::size_t eq = view.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(path.string() + ": line " +
                              std::to_string(line_no) +
                              ": expected 'tag = factor'");
        std::string key(trim(view.substr(0, eq)));
        std::string value(trim(view.substr(eq + 1)));
        const auto& bases = TagVocabulary::base_labels();
        auto it = std::find(bases.begin(), bases.end(), key);
        if (it == bases.end())
            throw ConfigError(path.string() + ": line " +
                              std::to_string(line_no) + ": unknown tag '" +
                              key + "'");
        int factor = 0;
        try {
            factor = std::stoi(value);
        } catch (const std::exception&) {
            throw ConfigError(path.string() + ": line " +
                              std::to_string(line_no) + ": factor '" + value +
                              "' is not an integer");
        }
        if (factor < 1)
            throw ConfigError(path.string() + ": line " +
                              std::to_string(line_no) + ": factor must be >= 1");
        table.factors[it - bases.begin()] = factor;
    }
    return table;
}

int FactorTable::sentence_factor(const SentenceRecord& s) const {
    int best = 1;
    for (const auto& t : s.tokens) {
        int base = TagVocabulary::base_of(t.tag);
        if (base >= 0 && factors[base] > best) best = factors[base];
    }
    return best;
}

std::vector<SentenceExample> balance_task1(
    const std::vector<SentenceExample>& records) {
    std::vector<SentenceExample> out;
    out.reserve(records.size() * 2);
    out.insert(out.end(), records.begin(), records.end());
    for (const auto& r : records)
        if (r.label) out.push_back(r);
    return out;
}

std::vector<SentenceRecord> oversample_task2(
    const std::vector<SentenceRecord>& sentences, const FactorTable& table) {
    std::vector<SentenceRecord> out;
    out.reserve(sentences.size());
    for (const auto& s : sentences) {
        int m = table.sentence_factor(s);
        for (int k = 0; k < m; ++k) out.push_back(s);
    }
    return out;
}

}  // namespace deft
