#include "deft/crf.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "deft/error.hpp"
#include "deft/kernels.hpp"
#include "deft/numeric.hpp"

namespace deft {

Crf::Crf(int num_labels, int dim)
    : num_labels_(num_labels),
      dim_(dim),
      W_({static_cast<std::size_t>(num_labels + 1),
          static_cast<std::size_t>(num_labels), static_cast<std::size_t>(dim)}),
      b_({static_cast<std::size_t>(num_labels + 1),
          static_cast<std::size_t>(num_labels)}),
      gW_(W_.shape),
      gb_(b_.shape) {}

void Crf::init(Rng& rng) {
    W_.fill_uniform(rng, -0.05f, 0.05f);
    b_.zero();
}

void Crf::zero_grad() {
    gW_.zero();
    gb_.zero();
}

std::vector<double> Crf::pair_scores(const float* x, std::size_t n) const {
    const std::size_t pairs =
        static_cast<std::size_t>(num_labels_ + 1) *
        static_cast<std::size_t>(num_labels_);
    std::vector<double> psi(n * pairs);
    for (std::size_t i = 0; i < n; ++i) {
        const float* xi = x + i * static_cast<std::size_t>(dim_);
        double* out = psi.data() + i * pairs;
        for (std::size_t p = 0; p < pairs; ++p)
            out[p] = kernels::dot(W_.data() + p * static_cast<std::size_t>(dim_),
                                  xi, static_cast<std::size_t>(dim_)) +
                     static_cast<double>(b_.data()[p]);
    }
    return psi;
}

double Crf::sequence_score(const float* x, std::size_t n,
                           const std::vector<int>& y) const {
    if (y.size() != n)
        throw DataError("label sequence length " + std::to_string(y.size()) +
                        " does not match input length " + std::to_string(n));
    double score = 0.0;
    int prev = bos();
    for (std::size_t i = 0; i < n; ++i) {
        const float* xi = x + i * static_cast<std::size_t>(dim_);
        std::size_t p = pair_offset(prev, y[i]);
        score += kernels::dot(W_.data() + p * static_cast<std::size_t>(dim_),
                              xi, static_cast<std::size_t>(dim_)) +
                 static_cast<double>(b_.data()[p]);
        prev = y[i];
    }
    return score;
}

double Crf::log_partition_scores(const std::vector<double>& psi, std::size_t n,
                                 int num_labels) {
    const std::size_t K = static_cast<std::size_t>(num_labels);
    const std::size_t pairs = (K + 1) * K;
    std::vector<double> alpha(K), next(K), work(K);
    const double* psi0 = psi.data();
    for (std::size_t y = 0; y < K; ++y) alpha[y] = psi0[K * K + y];  // begin row
    for (std::size_t i = 1; i < n; ++i) {
        const double* p = psi.data() + i * pairs;
        for (std::size_t y = 0; y < K; ++y) {
            for (std::size_t prev = 0; prev < K; ++prev)
                work[prev] = alpha[prev] + p[prev * K + y];
            next[y] = logsumexp(work.data(), K);
        }
        alpha.swap(next);
    }
    return logsumexp(alpha.data(), K);
}

double Crf::log_partition(const float* x, std::size_t n) const {
    return log_partition_scores(pair_scores(x, n), n, num_labels_);
}

double Crf::nll_and_gradient(const float* x, std::size_t n,
                             const std::vector<int>& y, float* dx) {
    if (y.size() != n)
        throw DataError("label sequence length " + std::to_string(y.size()) +
                        " does not match input length " + std::to_string(n));
    const std::size_t K = static_cast<std::size_t>(num_labels_);
    const std::size_t D = static_cast<std::size_t>(dim_);
    const std::size_t pairs = (K + 1) * K;
    const std::vector<double> psi = pair_scores(x, n);

    // Forward.
    std::vector<double> alpha(n * K);
    for (std::size_t v = 0; v < K; ++v) alpha[v] = psi[K * K + v];
    std::vector<double> work(K);
    for (std::size_t i = 1; i < n; ++i) {
        const double* p = psi.data() + i * pairs;
        for (std::size_t v = 0; v < K; ++v) {
            for (std::size_t u = 0; u < K; ++u)
                work[u] = alpha[(i - 1) * K + u] + p[u * K + v];
            alpha[i * K + v] = logsumexp(work.data(), K);
        }
    }
    const double log_z = logsumexp(alpha.data() + (n - 1) * K, K);

    // Backward.
    std::vector<double> beta(n * K, 0.0);
    for (std::size_t i = n - 1; i-- > 0;) {
        const double* p = psi.data() + (i + 1) * pairs;
        for (std::size_t u = 0; u < K; ++u) {
            for (std::size_t v = 0; v < K; ++v)
                work[v] = p[u * K + v] + beta[(i + 1) * K + v];
            beta[i * K + u] = logsumexp(work.data(), K);
        }
    }

    // Expected minus observed pair counts, accumulated in double.
    std::vector<double> coeff(pairs);
    std::vector<double> dW(pairs * D, 0.0);
    std::vector<double> db(pairs, 0.0);
    std::vector<double> dxi(D);
    int prev_gold = bos();
    for (std::size_t i = 0; i < n; ++i) {
        const double* p = psi.data() + i * pairs;
        std::fill(coeff.begin(), coeff.end(), 0.0);
        if (i == 0) {
            for (std::size_t v = 0; v < K; ++v)
                coeff[K * K + v] = std::exp(p[K * K + v] + beta[v] - log_z);
        } else {
            for (std::size_t u = 0; u < K; ++u)
                for (std::size_t v = 0; v < K; ++v)
                    coeff[u * K + v] = std::exp(alpha[(i - 1) * K + u] +
                                                p[u * K + v] +
                                                beta[i * K + v] - log_z);
        }
        coeff[pair_offset(prev_gold, y[i])] -= 1.0;
        prev_gold = y[i];

        const float* xi = x + i * D;
        std::fill(dxi.begin(), dxi.end(), 0.0);
        for (std::size_t pr = 0; pr < pairs; ++pr) {
            const double c = coeff[pr];
            if (c == 0.0) continue;
            db[pr] += c;
            const float* w = W_.data() + pr * D;
            double* dw = dW.data() + pr * D;
            for (std::size_t d = 0; d < D; ++d) {
                dw[d] += c * static_cast<double>(xi[d]);
                dxi[d] += c * static_cast<double>(w[d]);
            }
        }
        if (dx != nullptr) {
            float* out = dx + i * D;
            for (std::size_t d = 0; d < D; ++d)
                out[d] = static_cast<float>(dxi[d]);
        }
    }
    for (std::size_t k = 0; k < pairs * D; ++k)
        gW_.data()[k] += static_cast<float>(dW[k]);
    for (std::size_t k = 0; k < pairs; ++k)
        gb_.data()[k] += static_cast<float>(db[k]);

    // NLL = log Z - score(gold); recompute the gold score from the lattice.
    double gold = 0.0;
    int prev = bos();
    for (std::size_t i = 0; i < n; ++i) {
        gold += psi[i * pairs + pair_offset(prev, y[i])];
        prev = y[i];
    }
    return log_z - gold;
}

std::vector<int> Crf::viterbi_scores(const std::vector<double>& psi,
                                     std::size_t n, int num_labels) {
    const std::size_t K = static_cast<std::size_t>(num_labels);
    const std::size_t pairs = (K + 1) * K;
    std::vector<double> delta(n * K);
    std::vector<int> back(n * K, -1);
    for (std::size_t v = 0; v < K; ++v) delta[v] = psi[K * K + v];
    for (std::size_t i = 1; i < n; ++i) {
        const double* p = psi.data() + i * pairs;
        for (std::size_t v = 0; v < K; ++v) {
            double best = delta[(i - 1) * K] + p[v];
            int best_u = 0;
            for (std::size_t u = 1; u < K; ++u) {
                double s = delta[(i - 1) * K + u] + p[u * K + v];
                if (s > best) {  // strict: ties keep the lower previous label
                    best = s;
                    best_u = static_cast<int>(u);
                }
            }
            delta[i * K + v] = best;
            back[i * K + v] = best_u;
        }
    }
    std::size_t last = 0;
    for (std::size_t v = 1; v < K; ++v)
        if (delta[(n - 1) * K + v] > delta[(n - 1) * K + last]) last = v;
    std::vector<int> path(n);
    path[n - 1] = static_cast<int>(last);
    for (std::size_t i = n - 1; i > 0; --i)
        path[i - 1] = back[i * K + static_cast<std::size_t>(path[i])];
    return path;
}

std::vector<int> Crf::viterbi(const float* x, std::size_t n) const {
    return viterbi_scores(pair_scores(x, n), n, num_labels_);
}

}  // namespace deft
