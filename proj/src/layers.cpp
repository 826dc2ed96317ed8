#include "deft/layers.hpp"

#include "deft/kernels.hpp"

namespace deft {

void Linear::forward(const float* x, float* y) const {
    kernels::affine(W.data(), b.data(), x, y, out_dim(), in_dim());
}

void Linear::backward(const float* x, const float* dy, float* dx) {
    const std::size_t out = out_dim();
    const std::size_t in = in_dim();
    if (dx != nullptr) {
        for (std::size_t j = 0; j < in; ++j) dx[j] = 0.0f;
        for (std::size_t r = 0; r < out; ++r)
            kernels::axpy(dy[r], W.row(r), dx, in);
    }
    for (std::size_t r = 0; r < out; ++r) {
        kernels::axpy(dy[r], x, gW.row(r), in);
        gb.data()[r] += dy[r];
    }
}

void Dropout::apply(Rng& rng, float* y, float* mask, std::size_t n) const {
    if (p <= 0.0f) {
        for (std::size_t i = 0; i < n; ++i) mask[i] = 1.0f;
        return;
    }
    const float scale = 1.0f / (1.0f - p);
    for (std::size_t i = 0; i < n; ++i) {
        mask[i] = rng.uniform() < static_cast<double>(p) ? 0.0f : scale;
        y[i] *= mask[i];
    }
}

}  // namespace deft
