#pragma once

#include <cstdint>
#include <vector>

#include "deft/corpus.hpp"
#include "deft/layers.hpp"

namespace deft {

// Sentence classifier on the pooled representation: d_out -> 512 -> 1 with a
// sigmoid on the output scalar.
class ClassifierHead {
public:
    ClassifierHead(int d_in, int hidden);

    void init(std::uint64_t seed);

    struct Cache {
        std::vector<float> input;
        Tensor h_pre, h;
        float logit = 0.0f;
    };

    // Returns the probability, strictly inside (0, 1).
    double forward(const float* pooled, Cache& cache) const;

    // dprob_dlogit already folded into dlogit by the caller; writes the
    // gradient w.r.t. the pooled vector.
    void backward(const Cache& cache, float dlogit, float* dpooled);

    Linear& layer1() { return l1_; }
    Linear& layer2() { return l2_; }
    void zero_grad();

    static bool decide(double probability) { return probability >= 0.5; }

private:
    int d_in_;
    int hidden_;
    Linear l1_;  // hidden x d_in
    Linear l2_;  // 1 x hidden
};

// Per-token affine classifier with softmax cross-entropy (tag-id and relation
// heads of the multi-task setting).
class SoftmaxHead {
public:
    SoftmaxHead(int categories, int d_in);

    void init(std::uint64_t seed, const char* name);

    // Mean cross-entropy over the sequence; when dx is non-null, adds
    // scale * dLoss/dx into it (n x d_in).
    double loss_and_gradient(const float* x, std::size_t n,
                             const std::vector<int>& gold, float scale,
                             float* dx);

    // Argmax categories, lowest index on ties.
    std::vector<int> predict(const float* x, std::size_t n) const;

    Linear& layer() { return proj_; }
    void zero_grad() { proj_.zero_grad(); }
    int categories() const { return categories_; }

private:
    int categories_;
    int d_in_;
    Linear proj_;
};

struct LossWeights {
    double lambda1 = 0.33;
    double lambda2 = 0.33;
    double lambda3 = 0.33;
};

// Eq-style weighted sum of the three per-task losses.
inline double multitask_loss(double tag_loss, double id_loss, double rel_loss,
                             const LossWeights& w) {
    return w.lambda1 * tag_loss + w.lambda2 * id_loss + w.lambda3 * rel_loss;
}

// Gold tag ids -> slot categories (0..9 by first occurrence in the window,
// 10 = none). Ids beyond the tenth distinct one are counted in *overflow and
// mapped to none.
std::vector<std::vector<int>> window_id_categories(const ContextWindow& w,
                                                   std::size_t* overflow);

// Predicted slot categories -> tag ids written back into the window's tokens:
// slot s becomes id s+1, none becomes 0. token_categories holds one category
// per token, sentence by sentence.
void assign_tag_ids(ContextWindow& w,
                    const std::vector<std::vector<int>>& token_categories);

}  // namespace deft
