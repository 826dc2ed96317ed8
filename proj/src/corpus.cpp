#include "deft/corpus.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "deft/error.hpp"

namespace deft {

namespace {

constexpr std::string_view kLeftAttach = ".,;:!?)]'";
constexpr std::string_view kRightAttach = "([";

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t tab = line.find('\t', start);
        if (tab == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    return fields;
}

std::int64_t parse_int(std::string_view field, std::string_view what,
                       std::size_t line_no) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(),
                                     value);
    if (ec != std::errc() || ptr != field.data() + field.size())
        throw ParseError("line " + std::to_string(line_no) + ": " +
                         std::string(what) + " is not an integer: '" +
                         std::string(field) + "'");
    return value;
}

bool is_blank(std::string_view line) {
    for (char c : line)
        if (c != ' ' && c != '\t' && c != '\r') return false;
    return true;
}

bool starts_uppercase(std::string_view text) {
    return !text.empty() && text.front() >= 'A' && text.front() <= 'Z';
}

bool is_sentence_final(std::string_view text) {
    return text == "." || text == "!" || text == "?";
}

// Splits a window's token stream into sentences: a boundary follows a
// sentence-final punctuation token when the next token starts a new sentence
// (capitalized) or the window ends.
std::vector<SentenceRecord> segment_sentences(std::vector<DeftToken> tokens) {
    std::vector<SentenceRecord> sentences;
    std::vector<DeftToken> current;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        current.push_back(std::move(tokens[i]));
        bool boundary = false;
        if (is_sentence_final(current.back().text)) {
            if (i + 1 == tokens.size() || starts_uppercase(tokens[i + 1].text))
                boundary = true;
        }
        if (boundary) {
            sentences.push_back(make_sentence(std::move(current)));
            current.clear();
        }
    }
    if (!current.empty()) sentences.push_back(make_sentence(std::move(current)));
    return sentences;
}

void append_line(std::string& out, const DeftToken& t) {
    out += t.text;
    out += '\t';
    out += t.source;
    out += '\t';
    out += std::to_string(t.start_char);
    out += '\t';
    out += std::to_string(t.end_char);
    out += '\t';
    out += TagVocabulary::name(t.tag);
    out += '\t';
    out += std::to_string(t.tag_id);
    out += '\t';
    out += std::to_string(t.root_id);
    out += '\t';
    out += relation_labels()[t.relation];
    out += '\n';
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << contents;
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace

bool attaches_left(std::string_view token) {
    return !token.empty() && kLeftAttach.find(token.front()) != std::string_view::npos;
}

bool attaches_right(std::string_view token) {
    return !token.empty() && kRightAttach.find(token.back()) != std::string_view::npos;
}

std::string join_tokens(const std::vector<std::string_view>& texts,
                        std::vector<TokenSpan>* spans) {
    std::string out;
    if (spans != nullptr) {
        spans->clear();
        spans->reserve(texts.size());
    }
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (i > 0 && !attaches_left(texts[i]) && !attaches_right(texts[i - 1]))
            out += ' ';
        if (spans != nullptr)
            spans->push_back({out.size(), out.size() + texts[i].size()});
        out += texts[i];
    }
    return out;
}

std::string reconstruct_sentence(const std::vector<DeftToken>& tokens,
                                 std::vector<TokenSpan>* spans) {
    std::vector<std::string_view> texts;
    texts.reserve(tokens.size());
    for (const auto& t : tokens) texts.push_back(t.text);
    return join_tokens(texts, spans);
}

bool derive_sentence_label(const SentenceRecord& s) {
    for (const auto& t : s.tokens) {
        int base = TagVocabulary::base_of(t.tag);
        if (base >= 0 && TagVocabulary::base_labels()[base] == "Definition")
            return true;
    }
    return false;
}

SentenceRecord make_sentence(std::vector<DeftToken> tokens) {
    SentenceRecord s;
    s.tokens = std::move(tokens);
    s.sentence_text = reconstruct_sentence(s.tokens, &s.token_spans);
    s.has_definition = derive_sentence_label(s);
    return s;
}

std::vector<ContextWindow> parse_deft_text(std::string_view text,
                                           std::string_view origin) {
    std::vector<ContextWindow> windows;
    std::vector<DeftToken> pending;
    int next_window_id = 0;

    auto flush = [&] {
        if (pending.empty()) return;
        ContextWindow w;
        w.window_id = next_window_id++;
        w.sentences = segment_sentences(std::move(pending));
        pending.clear();
        windows.push_back(std::move(w));
    };

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line = nl == std::string_view::npos
                                    ? text.substr(pos)
                                    : text.substr(pos, nl - pos);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

        if (is_blank(line)) {
            flush();
        } else {
            auto fields = split_tabs(line);
            if (fields.size() != 8)
                throw ParseError(std::string(origin) + ": line " +
                                 std::to_string(line_no) + ": expected 8 " +
                                 "tab-separated columns, got " +
                                 std::to_string(fields.size()));
            DeftToken t;
            t.text = std::string(fields[0]);
            if (t.text.empty())
                throw ParseError(std::string(origin) + ": line " +
                                 std::to_string(line_no) + ": empty token");
            t.source = std::string(fields[1]);
            t.start_char = parse_int(fields[2], "start_char", line_no);
            t.end_char = parse_int(fields[3], "end_char", line_no);
            if (t.start_char < 0 || t.end_char <= t.start_char)
                throw ParseError(std::string(origin) + ": line " +
                                 std::to_string(line_no) +
                                 ": invalid character span [" +
                                 std::to_string(t.start_char) + ", " +
                                 std::to_string(t.end_char) + ")");
            auto tag = TagVocabulary::index_of(fields[4]);
            if (!tag)
                throw ParseError(std::string(origin) + ": line " +
                                 std::to_string(line_no) + ": unknown tag '" +
                                 std::string(fields[4]) + "'");
            t.tag = *tag;
            t.tag_id = static_cast<int>(parse_int(fields[5], "tag_id", line_no));
            t.root_id =
                static_cast<int>(parse_int(fields[6], "root_id", line_no));
            if (t.tag_id < 0 || t.root_id < 0)
                throw ParseError(std::string(origin) + ": line " +
                                 std::to_string(line_no) + ": negative id");
            auto rel = relation_index(fields[7]);
            if (!rel)
                throw ParseError(std::string(origin) + ": line " +
                                 std::to_string(line_no) +
                                 ": unknown relation '" +
                                 std::string(fields[7]) + "'");
            t.relation = *rel;
            pending.push_back(std::move(t));
        }

        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    flush();
    return windows;
}

std::vector<ContextWindow> parse_deft_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_deft_text(buf.str(), path.filename().string());
}

void write_deft_file(const std::vector<ContextWindow>& windows,
                     const std::filesystem::path& path) {
    std::string out;
    for (std::size_t w = 0; w < windows.size(); ++w) {
        if (w > 0) out += '\n';
        for (const auto& s : windows[w].sentences)
            for (const auto& t : s.tokens) append_line(out, t);
    }
    write_text_file(path, out);
}

void write_predictions(const std::vector<ContextWindow>& windows, Task task,
                       const std::filesystem::path& path) {
    if (task == Task::Sentence) {
        std::string out;
        for (const auto& w : windows)
            for (const auto& s : w.sentences) {
                out += s.sentence_text;
                out += '\t';
                out += s.has_definition ? '1' : '0';
                out += '\n';
            }
        write_text_file(path, out);
        return;
    }
    write_deft_file(windows, path);
}

std::vector<SentenceExample> read_sentence_file(
    const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path.string() + "'");
    std::vector<SentenceExample> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (is_blank(line)) continue;
        std::size_t tab = line.rfind('\t');
        if (tab == std::string::npos)
            throw ParseError(path.filename().string() + ": line " +
                             std::to_string(line_no) +
                             ": expected 'text<TAB>label'");
        std::string label = line.substr(tab + 1);
        if (label != "0" && label != "1")
            throw ParseError(path.filename().string() + ": line " +
                             std::to_string(line_no) + ": label must be 0 or 1");
        out.push_back({line.substr(0, tab), label == "1"});
    }
    return out;
}

void write_sentence_file(const std::vector<SentenceExample>& examples,
                         const std::filesystem::path& path) {
    std::string out;
    for (const auto& e : examples) {
        out += e.text;
        out += '\t';
        out += e.label ? '1' : '0';
        out += '\n';
    }
    write_text_file(path, out);
}

}  // namespace deft
