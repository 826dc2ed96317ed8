#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace deft {

// Per-label precision/recall/F1 with macro averages, raw and row-normalized
// confusion matrices. The 0/0 -> 0 convention applies throughout; macro
// averages skip labels with zero gold support.
struct EvalReport {
    std::vector<std::string> label_names;
    std::vector<double> precision;
    std::vector<double> recall;
    std::vector<double> f1;
    std::vector<std::size_t> support;       // gold count per label
    std::vector<bool> in_macro;             // member of the evaluation set
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    std::vector<std::vector<std::size_t>> confusion;  // rows = true labels
    std::vector<std::vector<double>> confusion_normalized;
    std::size_t total = 0;
    std::size_t correct = 0;
    std::size_t bio_violations = 0;  // I-X not preceded by B-X/I-X in pred

    double accuracy() const {
        return total == 0 ? 0.0
                          : static_cast<double>(correct) /
                                static_cast<double>(total);
    }
};

// Row-normalizes a confusion matrix; zero-support rows stay zero.
std::vector<std::vector<double>> normalize_confusion(
    const std::vector<std::vector<std::size_t>>& matrix);

// Token-level metrics over aligned gold/pred label sequences. eval_labels
// selects the macro-average set; the confusion matrix covers all labels.
EvalReport compute_metrics(const std::vector<std::vector<int>>& gold,
                           const std::vector<std::vector<int>>& pred,
                           const std::vector<int>& eval_labels,
                           const std::vector<std::string>& label_names);

// Binary sentence metrics: positive-class P/R/F1 plus the macro over both
// classes and the 2x2 confusion matrix.
EvalReport sentence_metrics(const std::vector<bool>& gold,
                            const std::vector<bool>& pred);

// Rendering: TSV (one row per label plus the macro row) and an aligned
// plain-text table; confusion matrices as TSV with label headers.
std::string render_metrics_tsv(const EvalReport& report);
std::string render_metrics_table(const EvalReport& report);
std::string render_confusion_tsv(const EvalReport& report, bool normalized);

}  // namespace deft
