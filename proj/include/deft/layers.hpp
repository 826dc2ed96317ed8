#pragma once

#include <cstddef>

#include "deft/rng.hpp"
#include "deft/tensor.hpp"

namespace deft {

// Affine map y = W x + b with gradient accumulation. W is out x in.
struct Linear {
    Tensor W, b, gW, gb;

    Linear() = default;
    Linear(std::size_t out, std::size_t in)
        : W({out, in}), b({out}), gW({out, in}), gb({out}) {}

    std::size_t out_dim() const { return W.shape[0]; }
    std::size_t in_dim() const { return W.shape[1]; }

    void init(Rng& rng) {
        W.fill_uniform(rng, -0.05f, 0.05f);
        b.zero();
    }

    void forward(const float* x, float* y) const;

    // Accumulates gW += dy (x) x, gb += dy; when dx is non-null it is
    // overwritten with W^T dy.
    void backward(const float* x, const float* dy, float* dx);

    void zero_grad() {
        gW.zero();
        gb.zero();
    }
};

// Inverted dropout: units are kept with probability 1-p and scaled by
// 1/(1-p), so inference needs no rescaling.
struct Dropout {
    float p = 0.0f;

    // Fills mask with 0 or 1/(1-p) and multiplies y elementwise.
    void apply(Rng& rng, float* y, float* mask, std::size_t n) const;
};

}  // namespace deft
