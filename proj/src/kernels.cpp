#include "deft/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace deft::kernels {

namespace {

struct Vtable {
    Backend backend;
    const char* name;
    double (*dot)(const float*, const float*, std::size_t);
    void (*axpy)(float, const float*, float*, std::size_t);
    void (*relu)(const float*, float*, std::size_t);
    void (*relu_grad)(const float*, const float*, float*, std::size_t);
    void (*adam_update)(float*, float*, float*, const float*, std::size_t,
                        float, float, float, float, float, float);
};

constexpr Vtable kScalar = {Backend::Scalar, "scalar",
                            scalar::dot,     scalar::axpy,
                            scalar::relu,    scalar::relu_grad,
                            scalar::adam_update};

#if DEFT_X86_64
constexpr Vtable kAvx2 = {Backend::Avx2, "avx2",
                          avx2::dot,     avx2::axpy,
                          avx2::relu,    avx2::relu_grad,
                          avx2::adam_update};
#endif

Vtable pick(Backend b) {
    if (b == Backend::Auto) {
        const char* env = std::getenv("DEFT_KERNELS");
        if (env != nullptr) {
            if (std::strcmp(env, "scalar") == 0) return kScalar;
#if DEFT_X86_64
            if (std::strcmp(env, "avx2") == 0 && avx2::supported())
                return kAvx2;
#endif
        }
#if DEFT_X86_64
        if (avx2::supported()) return kAvx2;
#endif
        return kScalar;
    }
#if DEFT_X86_64
    if (b == Backend::Avx2 && avx2::supported()) return kAvx2;
#endif
    return kScalar;
}

Vtable& active() {
    static Vtable t = pick(Backend::Auto);
    return t;
}

}  // namespace

void set_backend(Backend b) { active() = pick(b); }

Backend active_backend() { return active().backend; }

const char* backend_name() { return active().name; }

double dot(const float* a, const float* b, std::size_t n) {
    return active().dot(a, b, n);
}

void axpy(float alpha, const float* x, float* y, std::size_t n) {
    active().axpy(alpha, x, y, n);
}

void relu(const float* x, float* y, std::size_t n) {
    active().relu(x, y, n);
}

void relu_grad(const float* x, const float* dy, float* dx, std::size_t n) {
    active().relu_grad(x, dy, dx, n);
}

void adam_update(float* p, float* m, float* v, const float* g, std::size_t n,
                 float lr, float beta1, float beta2, float eps, float inv_bc1,
                 float inv_bc2) {
    active().adam_update(p, m, v, g, n, lr, beta1, beta2, eps, inv_bc1,
                         inv_bc2);
}

void affine(const float* W, const float* b, const float* x, float* y,
            std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r)
        y[r] = static_cast<float>(dot(W + r * cols, x, cols)) + b[r];
}

}  // namespace deft::kernels
