#include "deft/eval.hpp"

#include <algorithm>
#include <cstdio>

#include "deft/error.hpp"
#include "deft/labels.hpp"

namespace deft {

namespace {

double safe_div(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

std::string format_double(double v, const char* fmt) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

bool labels_are_tags(const std::vector<std::string>& names) {
    return names == TagVocabulary::labels();
}

std::size_t count_bio_violations(const std::vector<std::vector<int>>& pred) {
    std::size_t violations = 0;
    for (const auto& seq : pred) {
        int prev = TagVocabulary::kOutside;
        for (int label : seq) {
            if (TagVocabulary::is_inside(label) &&
                TagVocabulary::base_of(prev) != TagVocabulary::base_of(label))
                ++violations;
            prev = label;
        }
    }
    return violations;
}

void finish_report(EvalReport& r, const std::vector<int>& eval_labels) {
    const std::size_t L = r.label_names.size();
    r.precision.assign(L, 0.0);
    r.recall.assign(L, 0.0);
    r.f1.assign(L, 0.0);
    r.support.assign(L, 0);
    r.in_macro.assign(L, false);
    for (int l : eval_labels) r.in_macro[static_cast<std::size_t>(l)] = true;

    std::vector<std::size_t> row_sum(L, 0), col_sum(L, 0);
    for (std::size_t g = 0; g < L; ++g)
        for (std::size_t p = 0; p < L; ++p) {
            row_sum[g] += r.confusion[g][p];
            col_sum[p] += r.confusion[g][p];
            r.total += r.confusion[g][p];
            if (g == p) r.correct += r.confusion[g][p];
        }

    double macro_p = 0.0, macro_r = 0.0, macro_f = 0.0;
    std::size_t macro_n = 0;
    for (std::size_t l = 0; l < L; ++l) {
        r.support[l] = row_sum[l];
        const double tp = static_cast<double>(r.confusion[l][l]);
        r.precision[l] = safe_div(tp, static_cast<double>(col_sum[l]));
        r.recall[l] = safe_div(tp, static_cast<double>(row_sum[l]));
        r.f1[l] = safe_div(2.0 * r.precision[l] * r.recall[l],
                           r.precision[l] + r.recall[l]);
        if (r.in_macro[l] && r.support[l] > 0) {
            macro_p += r.precision[l];
            macro_r += r.recall[l];
            macro_f += r.f1[l];
            ++macro_n;
        }
    }
    if (macro_n > 0) {
        r.macro_precision = macro_p / static_cast<double>(macro_n);
        r.macro_recall = macro_r / static_cast<double>(macro_n);
        r.macro_f1 = macro_f / static_cast<double>(macro_n);
    }
    r.confusion_normalized = normalize_confusion(r.confusion);
}

}  // namespace

std::vector<std::vector<double>> normalize_confusion(
    const std::vector<std::vector<std::size_t>>& matrix) {
    std::vector<std::vector<double>> out(matrix.size());
    for (std::size_t g = 0; g < matrix.size(); ++g) {
        out[g].assign(matrix[g].size(), 0.0);
        std::size_t sum = 0;
        for (std::size_t p = 0; p < matrix[g].size(); ++p) sum += matrix[g][p];
        if (sum == 0) continue;
        for (std::size_t p = 0; p < matrix[g].size(); ++p)
            out[g][p] = static_cast<double>(matrix[g][p]) /
                        static_cast<double>(sum);
    }
    return out;
}

EvalReport compute_metrics(const std::vector<std::vector<int>>& gold,
                           const std::vector<std::vector<int>>& pred,
                           const std::vector<int>& eval_labels,
                           const std::vector<std::string>& label_names) {
    if (gold.size() != pred.size())
        throw DataError("gold has " + std::to_string(gold.size()) +
                        " sequences, predictions have " +
                        std::to_string(pred.size()));
    EvalReport r;
    r.label_names = label_names;
    const std::size_t L = label_names.size();
    r.confusion.assign(L, std::vector<std::size_t>(L, 0));
    for (std::size_t s = 0; s < gold.size(); ++s) {
        if (gold[s].size() != pred[s].size())
            throw DataError("sentence " + std::to_string(s) +
                            ": gold has " + std::to_string(gold[s].size()) +
                            " tokens, prediction has " +
                            std::to_string(pred[s].size()));
        for (std::size_t i = 0; i < gold[s].size(); ++i)
            ++r.confusion[static_cast<std::size_t>(gold[s][i])]
                         [static_cast<std::size_t>(pred[s][i])];
    }
    if (labels_are_tags(label_names))
        r.bio_violations = count_bio_violations(pred);
    finish_report(r, eval_labels);
    return r;
}

EvalReport sentence_metrics(const std::vector<bool>& gold,
                            const std::vector<bool>& pred) {
    if (gold.size() != pred.size())
        throw DataError("gold has " + std::to_string(gold.size()) +
                        " sentences, predictions have " +
                        std::to_string(pred.size()));
    std::vector<std::vector<int>> g(1), p(1);
    g[0].reserve(gold.size());
    p[0].reserve(pred.size());
    for (std::size_t i = 0; i < gold.size(); ++i) {
        g[0].push_back(gold[i] ? 1 : 0);
        p[0].push_back(pred[i] ? 1 : 0);
    }
    return compute_metrics(g, p, {0, 1}, {"0", "1"});
}

std::string render_metrics_tsv(const EvalReport& r) {
    std::string out = "label\tprecision\trecall\tf1\tsupport\n";
    for (std::size_t l = 0; l < r.label_names.size(); ++l) {
        out += r.label_names[l];
        out += '\t' + format_double(r.precision[l], "%.9f");
        out += '\t' + format_double(r.recall[l], "%.9f");
        out += '\t' + format_double(r.f1[l], "%.9f");
        out += '\t' + std::to_string(r.support[l]);
        out += '\n';
    }
    out += "macro\t" + format_double(r.macro_precision, "%.9f") + '\t' +
           format_double(r.macro_recall, "%.9f") + '\t' +
           format_double(r.macro_f1, "%.9f") + '\t' +
           std::to_string(r.total) + '\n';
    return out;
}

std::string render_metrics_table(const EvalReport& r) {
    std::size_t width = 5;  // "macro"
    for (const auto& n : r.label_names) width = std::max(width, n.size());
    char line[256];
    std::string out;
    std::snprintf(line, sizeof(line), "%-*s  %9s  %9s  %9s  %8s\n",
                  static_cast<int>(width), "label", "precision", "recall",
                  "f1", "support");
    out += line;
    for (std::size_t l = 0; l < r.label_names.size(); ++l) {
        std::snprintf(line, sizeof(line), "%-*s  %9.4f  %9.4f  %9.4f  %8zu\n",
                      static_cast<int>(width), r.label_names[l].c_str(),
                      r.precision[l], r.recall[l], r.f1[l], r.support[l]);
        out += line;
    }
    std::snprintf(line, sizeof(line), "%-*s  %9.4f  %9.4f  %9.4f  %8zu\n",
                  static_cast<int>(width), "macro", r.macro_precision,
                  r.macro_recall, r.macro_f1, r.total);
    out += line;
    std::snprintf(line, sizeof(line), "accuracy %.4f", r.accuracy());
    out += line;
    if (labels_are_tags(r.label_names)) {
        std::snprintf(line, sizeof(line), "  bio-violations %zu",
                      r.bio_violations);
        out += line;
    }
    out += '\n';
    return out;
}

std::string render_confusion_tsv(const EvalReport& r, bool normalized) {
    std::string out = "true\\pred";
    for (const auto& n : r.label_names) out += '\t' + n;
    out += '\n';
    for (std::size_t g = 0; g < r.label_names.size(); ++g) {
        out += r.label_names[g];
        for (std::size_t p = 0; p < r.label_names.size(); ++p) {
            if (normalized)
                out += '\t' + format_double(r.confusion_normalized[g][p],
                                            "%.9f");
            else
                out += '\t' + std::to_string(r.confusion[g][p]);
        }
        out += '\n';
    }
    return out;
}

}  // namespace deft
