#pragma once

#include <cstddef>
#include <vector>

#include "deft/rng.hpp"
#include "deft/tensor.hpp"

namespace deft {

// Linear-chain CRF with one weight vector and one bias per ordered tag pair:
//
//   p(y | x) ∝ exp( sum_i  W[y_{i-1}, y_i] · x_i + b[y_{i-1}, y_i] )
//
// The begin-of-sequence pseudo-tag occupies the extra previous-tag row
// (index num_labels); there is no end pseudo-tag. All lattice computation is
// in double; parameters are float32.
class Crf {
public:
    Crf(int num_labels, int dim);

    int num_labels() const { return num_labels_; }
    int dim() const { return dim_; }
    int bos() const { return num_labels_; }

    Tensor& weights() { return W_; }
    const Tensor& weights() const { return W_; }
    Tensor& bias() { return b_; }
    const Tensor& bias() const { return b_; }
    Tensor& weights_grad() { return gW_; }
    Tensor& bias_grad() { return gb_; }

    void init(Rng& rng);  // W uniform in [-0.05, 0.05], b zero

    // Pair-score lattice psi: n positions, each (num_labels+1) x num_labels,
    // psi[i][prev][cur] = W[prev,cur] · x_i + b[prev,cur]. Position 0 only
    // uses the begin row but is computed in full.
    std::vector<double> pair_scores(const float* x, std::size_t n) const;

    // Unnormalized log-score of one label sequence.
    double sequence_score(const float* x, std::size_t n,
                          const std::vector<int>& y) const;

    // log sum over all K^n sequences, by the forward recursion in log space.
    double log_partition(const float* x, std::size_t n) const;

    // Negative log-likelihood of the gold sequence. Accumulates parameter
    // gradients into gW_/gb_ (expected minus observed pair counts, from
    // forward-backward marginals) and, when dx is non-null, writes the
    // gradient with respect to x (n x dim, overwritten).
    double nll_and_gradient(const float* x, std::size_t n,
                            const std::vector<int>& y, float* dx);

    // Highest scoring sequence; ties prefer the lower label index at each
    // backtracking step.
    std::vector<int> viterbi(const float* x, std::size_t n) const;

    // Lattice-level entry points, shared by the x-parameterized calls above.
    static double log_partition_scores(const std::vector<double>& psi,
                                       std::size_t n, int num_labels);
    static std::vector<int> viterbi_scores(const std::vector<double>& psi,
                                           std::size_t n, int num_labels);

    void zero_grad();

private:
    std::size_t pair_offset(int prev, int cur) const {
        return (static_cast<std::size_t>(prev) *
                    static_cast<std::size_t>(num_labels_) +
                static_cast<std::size_t>(cur));
    }

    int num_labels_;
    int dim_;
    Tensor W_;   // (K+1) x K x dim
    Tensor b_;   // (K+1) x K
    Tensor gW_;
    Tensor gb_;
};

}  // namespace deft
