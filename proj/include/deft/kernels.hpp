#pragma once

#include <cstddef>

// Numeric inner loops. Every kernel has a scalar reference implementation and
// an AVX2 variant; the active set is picked once at startup from CPUID and can
// be forced (tests, DEFT_KERNELS=scalar|avx2 in the environment).

#if defined(__x86_64__) || defined(_M_X64)
#define DEFT_X86_64 1
#else
#define DEFT_X86_64 0
#endif

namespace deft::kernels {

enum class Backend { Auto, Scalar, Avx2 };

void set_backend(Backend b);
Backend active_backend();
const char* backend_name();

// Dot product of float32 arrays, accumulated in double.
double dot(const float* a, const float* b, std::size_t n);

// y += alpha * x
void axpy(float alpha, const float* x, float* y, std::size_t n);

// y = max(x, 0)
void relu(const float* x, float* y, std::size_t n);

// dx = x > 0 ? dy : 0
void relu_grad(const float* x, const float* dy, float* dx, std::size_t n);

// In-place Adam step. inv_bc1/inv_bc2 are the precomputed bias corrections
// 1/(1-beta1^t) and 1/(1-beta2^t).
void adam_update(float* p, float* m, float* v, const float* g, std::size_t n,
                 float lr, float beta1, float beta2, float eps, float inv_bc1,
                 float inv_bc2);

// y[i] = dot(W row i, x) + b[i]; W is rows x cols row-major. Composed over the
// dispatched dot.
void affine(const float* W, const float* b, const float* x, float* y,
            std::size_t rows, std::size_t cols);

namespace scalar {
double dot(const float* a, const float* b, std::size_t n);
void axpy(float alpha, const float* x, float* y, std::size_t n);
void relu(const float* x, float* y, std::size_t n);
void relu_grad(const float* x, const float* dy, float* dx, std::size_t n);
void adam_update(float* p, float* m, float* v, const float* g, std::size_t n,
                 float lr, float beta1, float beta2, float eps, float inv_bc1,
                 float inv_bc2);
}  // namespace scalar

#if DEFT_X86_64
namespace avx2 {
bool supported();
double dot(const float* a, const float* b, std::size_t n);
void axpy(float alpha, const float* x, float* y, std::size_t n);
void relu(const float* x, float* y, std::size_t n);
void relu_grad(const float* x, const float* dy, float* dx, std::size_t n);
void adam_update(float* p, float* m, float* v, const float* g, std::size_t n,
                 float lr, float beta1, float beta2, float eps, float inv_bc1,
                 float inv_bc2);
}  // namespace avx2
#endif

}  // namespace deft::kernels
