#pragma once

#include <cmath>
#include <cstddef>

namespace deft {

// log(sum_i exp(v_i)) with max subtraction; n >= 1.
inline double logsumexp(const double* v, std::size_t n) {
    double m = v[0];
    for (std::size_t i = 1; i < n; ++i)
        if (v[i] > m) m = v[i];
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::exp(v[i] - m);
    return m + std::log(s);
}

inline double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace deft
