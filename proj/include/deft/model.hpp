#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deft/crf.hpp"
#include "deft/encoder.hpp"
#include "deft/heads.hpp"
#include "deft/pipeline.hpp"

namespace deft {

struct ParamRef {
    std::string name;
    Tensor* value;
    Tensor* grad;
    bool trainable;
};

struct ModelConfig {
    std::size_t vocab_size = 0;
    int d_emb = 256;
    int hidden = 512;
    int d_out = 128;
    int hidden_layers = 1;
    int num_labels = TagVocabulary::kNumLabels;
    float dropout = 0.2f;
    bool finetune = true;         // update the embedding table
    bool external_source = false; // per-sentence vectors come from a file
    LossWeights lambdas;
};

std::vector<ParamRef> encoder_params(Encoder& enc, const ModelConfig& cfg);

// Sentence classifier: encoder + pooled representation + sigmoid head.
class Task1Model {
public:
    explicit Task1Model(const ModelConfig& cfg);
    void init(std::uint64_t seed);
    std::vector<ParamRef> parameters();

    // Binary cross-entropy against the gold label; accumulates gradients.
    double train_loss(const std::vector<int>& ids, bool gold,
                      const Tensor* external, Rng& dropout_rng);
    double predict(const std::vector<int>& ids, const Tensor* external);

    Encoder& encoder() { return enc_; }
    ClassifierHead& head() { return head_; }
    void zero_grad();

private:
    ModelConfig cfg_;
    Encoder enc_;
    ClassifierHead head_;
    Rng unused_rng_{0};
};

// Token labeler: encoder + pair-indexed CRF.
class Task2Model {
public:
    explicit Task2Model(const ModelConfig& cfg);
    void init(std::uint64_t seed);
    std::vector<ParamRef> parameters();

    double train_loss(const EncodedSentence& item, const Tensor* external,
                      Rng& dropout_rng);
    std::vector<int> predict_piece_labels(const EncodedSentence& item,
                                          const Tensor* external);

    Encoder& encoder() { return enc_; }
    Crf& crf() { return crf_; }
    void zero_grad();

private:
    ModelConfig cfg_;
    Encoder enc_;
    Crf crf_;
};

// Joint tag/tag-id/relation model sharing one encoder, loss
// lambda1 L1 + lambda2 L2 + lambda3 L3.
class MultitaskModel {
public:
    explicit MultitaskModel(const ModelConfig& cfg);
    void init(std::uint64_t seed);
    std::vector<ParamRef> parameters();

    double train_loss(const EncodedSentence& item, const Tensor* external,
                      Rng& dropout_rng);

    struct Prediction {
        std::vector<int> piece_tags;
        std::vector<int> piece_id_cats;
        std::vector<int> piece_rel_cats;
    };
    Prediction predict(const EncodedSentence& item, const Tensor* external);

    Encoder& encoder() { return enc_; }
    Crf& crf() { return crf_; }
    SoftmaxHead& id_head() { return id_head_; }
    SoftmaxHead& rel_head() { return rel_head_; }
    void zero_grad();

private:
    ModelConfig cfg_;
    Encoder enc_;
    Crf crf_;
    SoftmaxHead id_head_;
    SoftmaxHead rel_head_;
};

}  // namespace deft
