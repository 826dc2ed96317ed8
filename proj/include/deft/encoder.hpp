#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "deft/layers.hpp"
#include "deft/rng.hpp"
#include "deft/tensor.hpp"

namespace deft {

// Per-subword contextual vectors supplied from outside, one block per
// sentence in corpus order. Lets genuine transformer embeddings be injected
// in place of the internal table.
struct ExternalEmbeddings {
    int d_emb = 0;
    std::vector<std::vector<std::string>> piece_texts;  // per sentence
    std::vector<Tensor> vectors;                        // each n_i x d_emb

    static ExternalEmbeddings load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    // Returns the block for sentence `index`, checking that its length (and
    // piece strings) match the tokenizer's output.
    const Tensor& block(std::size_t index,
                        const std::vector<std::string>& pieces) const;
};

struct EncoderConfig {
    std::size_t vocab_size = 0;
    int d_emb = 256;
    int hidden = 512;
    int d_out = 128;
    int hidden_layers = 1;  // the feed-forward projector stack depth
    float dropout = 0.2f;
    bool train_table = true;  // false = frozen token representations
};

// Token-representation layer: an embedding lookup (internal trainable table
// or external per-sentence vectors) projected through a feed-forward network
// with a 512-wide hidden layer and dropout.
class Encoder {
public:
    explicit Encoder(const EncoderConfig& cfg);

    const EncoderConfig& config() const { return cfg_; }
    Tensor& table() { return table_; }
    Tensor& table_grad() { return gtable_; }

    void init(std::uint64_t seed);

    struct Cache {
        std::size_t n = 0;
        std::vector<int> ids;
        bool external = false;
        Tensor e;                        // n x d_emb
        Tensor h1_pre, h1, mask1;        // n x hidden
        Tensor h2_pre, h2, mask2;        // second hidden layer when enabled
        Tensor out;                      // n x d_out
    };

    // Row i of the result is proj(embed(id_i)). Dropout is live only when
    // training; with external vectors the ids are ignored for the lookup but
    // still define the sequence length.
    void forward(const std::vector<int>& ids, const Tensor* external,
                 bool training, Rng& dropout_rng, Cache& cache) const;

    // Accumulates parameter gradients from d(out); fills dE (n x d_emb) into
    // the table gradient when the table is trainable.
    void backward(Cache& cache, const float* dout);

    // Sentence representation: the sequence-start row.
    static const float* pooled(const Cache& cache) { return cache.out.row(0); }

    Linear& layer1() { return l1_; }
    Linear& layer2() { return l2_; }
    Linear& output_layer() { return lo_; }

    void zero_grad();

private:
    EncoderConfig cfg_;
    Tensor table_;   // vocab x d_emb
    Tensor gtable_;
    Linear l1_;      // hidden x d_emb
    Linear l2_;      // hidden x hidden (only when hidden_layers == 2)
    Linear lo_;      // d_out x hidden
    Dropout drop_;
};

}  // namespace deft
