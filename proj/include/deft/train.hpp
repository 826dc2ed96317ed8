#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "deft/checkpoint.hpp"
#include "deft/model.hpp"
#include "deft/preprocess.hpp"

namespace deft {

struct TrainConfig {
    Task task = Task::Tokens;
    CleaningMode mode = CleaningMode::Finetune;
    double lr = 2e-5;
    int epochs = 100;
    int batch_size = 16;
    std::uint64_t seed = 1;
    LossWeights lambdas;
    int d_emb = 256;
    int d_out = 128;
    int hidden = 512;
    int hidden_layers = 1;
    std::filesystem::path checkpoint_dir;

    // 80% dropout while fine-tuning, 20% while frozen.
    float dropout() const {
        return mode == CleaningMode::Finetune ? 0.8f : 0.2f;
    }
    bool finetune() const { return mode == CleaningMode::Finetune; }
    void validate() const;  // throws ConfigError
};

// Adam with bias correction; moment constants from the optimizer's original
// definition.
class Adam {
public:
    explicit Adam(double lr) : lr_(lr) {}

    void step(const std::vector<ParamRef>& params);
    long steps() const { return t_; }

    static constexpr float kBeta1 = 0.9f;
    static constexpr float kBeta2 = 0.999f;
    static constexpr float kEps = 1e-8f;

private:
    double lr_;
    long t_ = 0;
    std::vector<Tensor> m_, v_;  // lazily sized against params
};

struct TrainResult {
    double best_metric = 0.0;
    int best_epoch = 0;
    std::vector<double> train_loss_trace;
    std::vector<double> dev_metric_trace;
};

// Sentence-classification training: examples are already cleaned text lines.
TrainResult train_task1(const TrainConfig& cfg, const SubwordVocabulary& vocab,
                        const std::vector<SentenceExample>& train,
                        const std::vector<SentenceExample>& dev,
                        const ExternalEmbeddings* train_ext = nullptr,
                        const ExternalEmbeddings* dev_ext = nullptr);

// Token labeling (task 2) and the multi-task variant, selected by cfg.task.
TrainResult train_sequence(const TrainConfig& cfg,
                           const SubwordVocabulary& vocab,
                           const std::vector<ContextWindow>& train,
                           const std::vector<ContextWindow>& dev,
                           const ExternalEmbeddings* train_ext = nullptr,
                           const ExternalEmbeddings* dev_ext = nullptr);

// Dev criteria, shared with the evaluate command.
double positive_f1(const std::vector<bool>& gold, const std::vector<bool>& pred);
double tag_macro_f1(const std::vector<std::vector<int>>& gold,
                    const std::vector<std::vector<int>>& pred);

// All non-O labels; the macro set for tag scoring.
std::vector<int> tag_eval_labels();

// Prepends the sequence-start piece.
std::vector<int> sentence_ids(const SubwordVocabulary& vocab,
                              std::string_view text);

// Gold token tags per sentence, for dev scoring.
std::vector<std::vector<int>> gold_token_tags(
    const std::vector<ContextWindow>& windows);

Manifest make_manifest(const TrainConfig& cfg, const SubwordVocabulary& vocab,
                       bool external_source, int epoch, double dev_metric);

ModelConfig model_config(const TrainConfig& cfg, std::size_t vocab_size,
                         bool external_source);

}  // namespace deft
