// AVX2/FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma; it must only be entered after avx2::supported() returned true.

#include "deft/kernels.hpp"

#if DEFT_X86_64

#include <immintrin.h>

#include <cmath>

namespace deft::kernels::avx2 {

bool supported() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

}  // namespace

double dot(const float* a, const float* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 av = _mm256_loadu_ps(a + i);
        __m256 bv = _mm256_loadu_ps(b + i);
        __m256d alo = _mm256_cvtps_pd(_mm256_castps256_ps128(av));
        __m256d blo = _mm256_cvtps_pd(_mm256_castps256_ps128(bv));
        __m256d ahi = _mm256_cvtps_pd(_mm256_extractf128_ps(av, 1));
        __m256d bhi = _mm256_cvtps_pd(_mm256_extractf128_ps(bv, 1));
        acc0 = _mm256_fmadd_pd(alo, blo, acc0);
        acc1 = _mm256_fmadd_pd(ahi, bhi, acc1);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i)
        acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return acc;
}

void axpy(float alpha, const float* x, float* y, std::size_t n) {
    const __m256 av = _mm256_set1_ps(alpha);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 xv = _mm256_loadu_ps(x + i);
        __m256 yv = _mm256_loadu_ps(y + i);
        _mm256_storeu_ps(y + i, _mm256_fmadd_ps(av, xv, yv));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void relu(const float* x, float* y, std::size_t n) {
    const __m256 zero = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(y + i, _mm256_max_ps(_mm256_loadu_ps(x + i), zero));
    for (; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_grad(const float* x, const float* dy, float* dx, std::size_t n) {
    const __m256 zero = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 xv = _mm256_loadu_ps(x + i);
        __m256 mask = _mm256_cmp_ps(xv, zero, _CMP_GT_OQ);
        __m256 dyv = _mm256_loadu_ps(dy + i);
        _mm256_storeu_ps(dx + i, _mm256_and_ps(mask, dyv));
    }
    for (; i < n; ++i) dx[i] = x[i] > 0.0f ? dy[i] : 0.0f;
}

void adam_update(float* p, float* m, float* v, const float* g, std::size_t n,
                 float lr, float beta1, float beta2, float eps, float inv_bc1,
                 float inv_bc2) {
    const __m256 b1 = _mm256_set1_ps(beta1);
    const __m256 b2 = _mm256_set1_ps(beta2);
    const __m256 ob1 = _mm256_set1_ps(1.0f - beta1);
    const __m256 ob2 = _mm256_set1_ps(1.0f - beta2);
    const __m256 lrv = _mm256_set1_ps(lr);
    const __m256 epsv = _mm256_set1_ps(eps);
    const __m256 bc1 = _mm256_set1_ps(inv_bc1);
    const __m256 bc2 = _mm256_set1_ps(inv_bc2);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 gv = _mm256_loadu_ps(g + i);
        __m256 mv = _mm256_fmadd_ps(b1, _mm256_loadu_ps(m + i),
                                    _mm256_mul_ps(ob1, gv));
        __m256 vv = _mm256_fmadd_ps(b2, _mm256_loadu_ps(v + i),
                                    _mm256_mul_ps(ob2, _mm256_mul_ps(gv, gv)));
        _mm256_storeu_ps(m + i, mv);
        _mm256_storeu_ps(v + i, vv);
        __m256 mhat = _mm256_mul_ps(mv, bc1);
        __m256 vhat = _mm256_mul_ps(vv, bc2);
        __m256 denom = _mm256_add_ps(_mm256_sqrt_ps(vhat), epsv);
        __m256 upd = _mm256_div_ps(_mm256_mul_ps(lrv, mhat), denom);
        _mm256_storeu_ps(p + i, _mm256_sub_ps(_mm256_loadu_ps(p + i), upd));
    }
    for (; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0f - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0f - beta2) * g[i] * g[i];
        const float mhat = m[i] * inv_bc1;
        const float vhat = v[i] * inv_bc2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

}  // namespace deft::kernels::avx2

#endif  // DEFT_X86_64
