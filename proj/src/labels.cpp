#include "deft/labels.hpp"

#include <unordered_map>

namespace deft {

namespace {

std::vector<std::string> make_labels() {
    std::vector<std::string> out;
    out.reserve(TagVocabulary::kNumLabels);
    out.emplace_back("O");
    for (const auto& base : TagVocabulary::base_labels()) {
        out.push_back("B-" + base);
        out.push_back("I-" + base);
    }
    return out;
}

template <class V>
std::unordered_map<std::string, int> make_index(const V& names) {
    std::unordered_map<std::string, int> idx;
    for (std::size_t i = 0; i < names.size(); ++i)
        idx.emplace(names[i], static_cast<int>(i));
    return idx;
}

}  // namespace

const std::vector<std::string>& TagVocabulary::labels() {
    static const std::vector<std::string> labels = make_labels();
    return labels;
}

const std::vector<std::string>& TagVocabulary::base_labels() {
    static const std::vector<std::string> bases = {
        "Term",       "Alias-Term",            "Referential-Term",
        "Definition", "Referential-Definition", "Qualifier"};
    return bases;
}

std::optional<int> TagVocabulary::index_of(std::string_view name) {
    static const auto idx = make_index(labels());
    auto it = idx.find(std::string(name));
    if (it == idx.end()) return std::nullopt;
    return it->second;
}

const std::string& TagVocabulary::name(int index) { return labels()[index]; }

const std::vector<std::string>& relation_labels() {
    static const std::vector<std::string> rels = {
        "0",   "Direct-defines", "Indirect-defines",
        "Refers-to", "AKA",      "Supplements"};
    return rels;
}

std::optional<int> relation_index(std::string_view name) {
    static const auto idx = make_index(relation_labels());
    auto it = idx.find(std::string(name));
    if (it == idx.end()) return std::nullopt;
    return it->second;
}

}  // namespace deft
