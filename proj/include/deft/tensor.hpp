#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <vector>

#include "deft/rng.hpp"

namespace deft {

// Dense row-major float32 tensor. Parameters and activations live in float32
// (the checkpoint payload width); reductions accumulate in double inside the
// kernels.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<float> v;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> s)
        : shape(std::move(s)), v(count(shape), 0.0f) {}

    static std::size_t count(const std::vector<std::size_t>& s) {
        std::size_t n = 1;
        for (auto d : s) n *= d;
        return n;
    }

    std::size_t size() const { return v.size(); }
    float* data() { return v.data(); }
    const float* data() const { return v.data(); }

    // 2-d access; the last dimension is contiguous.
    float* row(std::size_t i) {
        assert(shape.size() >= 2);
        return v.data() + i * stride0();
    }
    const float* row(std::size_t i) const {
        assert(shape.size() >= 2);
        return v.data() + i * stride0();
    }
    std::size_t stride0() const {
        std::size_t s = 1;
        for (std::size_t k = 1; k < shape.size(); ++k) s *= shape[k];
        return s;
    }

    float& at(std::size_t i, std::size_t j) {
        assert(shape.size() == 2 && i < shape[0] && j < shape[1]);
        return v[i * shape[1] + j];
    }
    float at(std::size_t i, std::size_t j) const {
        assert(shape.size() == 2 && i < shape[0] && j < shape[1]);
        return v[i * shape[1] + j];
    }

    void zero() { std::fill(v.begin(), v.end(), 0.0f); }

    void fill_uniform(Rng& rng, float lo, float hi) {
        for (auto& x : v) x = rng.uniform_float(lo, hi);
    }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

}  // namespace deft
