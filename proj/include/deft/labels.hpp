#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace deft {

// Closed label set for token tagging: O plus B-/I- variants of the six span
// types. The index mapping is fixed, O = 0, and B-X is always immediately
// followed by I-X.
struct TagVocabulary {
    static constexpr int kNumLabels = 13;
    static constexpr int kOutside = 0;
    static constexpr int kNumBase = 6;

    static const std::vector<std::string>& labels();
    static const std::vector<std::string>& base_labels();

    static std::optional<int> index_of(std::string_view name);
    static const std::string& name(int index);

    static bool is_begin(int index) { return index > 0 && index % 2 == 1; }
    static bool is_inside(int index) { return index > 0 && index % 2 == 0; }

    // B-X -> I-X; I-X and O map to themselves.
    static int to_inside(int index) { return is_begin(index) ? index + 1 : index; }

    // Base type of a B-/I- label, -1 for O.
    static int base_of(int index) { return index == 0 ? -1 : (index - 1) / 2; }
    static int begin_label(int base) { return 2 * base + 1; }
    static int inside_label(int base) { return 2 * base + 2; }
};

// Relation categories; index 0 is the none marker, written as "0".
inline constexpr int kNumRelations = 6;
const std::vector<std::string>& relation_labels();
std::optional<int> relation_index(std::string_view name);

// Tag-id head categories: slots 0..9 plus none.
inline constexpr int kNumIdCategories = 11;
inline constexpr int kIdNone = 10;
inline constexpr int kMaxTagSlots = 10;

}  // namespace deft
