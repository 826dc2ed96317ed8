#include <doctest.h>

#include <cmath>
#include <vector>

#include "deft/crf.hpp"
#include "deft/numeric.hpp"
#include "deft/rng.hpp"
#include "deft/tensor.hpp"

using namespace deft;

namespace {

// Independent scoring: walks W and b directly, no lattice code shared with
// the implementation.
double oracle_sequence_score(const Crf& crf, const std::vector<float>& x,
                             std::size_t n, const std::vector<int>& y) {
    const int K = crf.num_labels();
    const int D = crf.dim();
    double score = 0.0;
    int prev = K;  // begin pseudo-tag
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t pair =
            static_cast<std::size_t>(prev) * static_cast<std::size_t>(K) +
            static_cast<std::size_t>(y[i]);
        double dot = 0.0;
        for (int d = 0; d < D; ++d)
            dot += static_cast<double>(
                       crf.weights().v[pair * static_cast<std::size_t>(D) +
                                       static_cast<std::size_t>(d)]) *
                   static_cast<double>(x[i * static_cast<std::size_t>(D) +
                                         static_cast<std::size_t>(d)]);
        score += dot + static_cast<double>(crf.bias().v[pair]);
        prev = y[i];
    }
    return score;
}

// Enumerates all K^n sequences; returns (logZ, argmax) where the argmax tie
// rule matches per-step backtracking: among equal scores, the sequence whose
// labels are smallest when compared from the last position backwards.
std::pair<double, std::vector<int>> oracle_enumerate(const Crf& crf,
                                                     const std::vector<float>& x,
                                                     std::size_t n) {
    const int K = crf.num_labels();
    std::vector<int> y(n, 0);
    std::vector<double> scores;
    double best = -1e300;
    std::vector<int> best_y;
    auto reverse_less = [](const std::vector<int>& a,
                           const std::vector<int>& b) {
        for (std::size_t i = a.size(); i-- > 0;) {
            if (a[i] != b[i]) return a[i] < b[i];
        }
        return false;
    };
    while (true) {
        double s = oracle_sequence_score(crf, x, n, y);
        scores.push_back(s);
        if (s > best || (s == best && reverse_less(y, best_y))) {
            best = s;
            best_y = y;
        }
        std::size_t pos = 0;
        while (pos < n && ++y[pos] == K) {
            y[pos] = 0;
            ++pos;
        }
        if (pos == n) break;
    }
    return {logsumexp(scores.data(), scores.size()), best_y};
}

Crf random_crf(Rng& rng, int K, int D, float scale = 1.0f) {
    Crf crf(K, D);
    for (auto& w : crf.weights().v) w = rng.uniform_float(-scale, scale);
    for (auto& b : crf.bias().v) b = rng.uniform_float(-scale, scale);
    return crf;
}

std::vector<float> random_input(Rng& rng, std::size_t n, int D) {
    std::vector<float> x(n * static_cast<std::size_t>(D));
    for (auto& v : x) v = rng.uniform_float(-1.0f, 1.0f);
    return x;
}

}  // namespace

TEST_SUITE("crf") {

TEST_CASE("zero parameters score zero everywhere") {
    Crf crf(3, 4);
    std::vector<float> x(5 * 4, 0.5f);
    CHECK(crf.sequence_score(x.data(), 5, {0, 1, 2, 1, 0}) == 0.0);
    CHECK(crf.sequence_score(x.data(), 5, {2, 2, 2, 2, 2}) == 0.0);
}

TEST_CASE("zero parameters give a uniform lattice") {
    Crf crf(4, 3);
    std::vector<float> x(6 * 3, 1.0f);
    CHECK(crf.log_partition(x.data(), 6) ==
          doctest::Approx(6.0 * std::log(4.0)).epsilon(1e-12));
    // All-zeros decode by the tie rule.
    auto path = crf.viterbi(x.data(), 6);
    for (int label : path) CHECK(label == 0);
}

TEST_CASE("single-position score picks one begin-row entry") {
    Crf crf(2, 2);
    // W[BOS,0] . x = 1.5 with x = (1, 0.5): set the row to (1, 1).
    const std::size_t bos_row0 =
        (static_cast<std::size_t>(crf.bos()) * 2 + 0) * 2;
    crf.weights().v[bos_row0] = 1.0f;
    crf.weights().v[bos_row0 + 1] = 1.0f;
    std::vector<float> x = {1.0f, 0.5f};
    CHECK(crf.sequence_score(x.data(), 1, {0}) == doctest::Approx(1.5));

    // n = 1 partition is the log-sum over the begin row.
    std::vector<double> row = {crf.sequence_score(x.data(), 1, {0}),
                               crf.sequence_score(x.data(), 1, {1})};
    CHECK(crf.log_partition(x.data(), 1) ==
          doctest::Approx(logsumexp(row.data(), 2)).epsilon(1e-12));
}

TEST_CASE("random sequence scores match direct re-summation") {
    Rng rng(11);
    Crf crf = random_crf(rng, 3, 4);
    auto x = random_input(rng, 3, 4);
    for (const auto& y :
         {std::vector<int>{0, 1, 2}, {2, 2, 0}, {1, 0, 1}}) {
        CHECK(crf.sequence_score(x.data(), 3, y) ==
              doctest::Approx(oracle_sequence_score(crf, x, 3, y))
                  .epsilon(1e-12));
    }
}

TEST_CASE("log partition agrees with exhaustive enumeration") {
    Rng rng(2025);
    for (int trial = 0; trial < 100; ++trial) {
        const int K = 2 + static_cast<int>(rng.below(4));   // up to 5
        const int D = 1 + static_cast<int>(rng.below(8));   // up to 8
        const std::size_t n = 1 + rng.below(6);             // up to 6
        Crf crf = random_crf(rng, K, D);
        auto x = random_input(rng, n, D);
        auto [logz, argmax] = oracle_enumerate(crf, x, n);
        CHECK(std::abs(crf.log_partition(x.data(), n) - logz) <= 1e-8);
    }
}

TEST_CASE("viterbi agrees with brute force under the tie rule") {
    Rng rng(4097);
    for (int trial = 0; trial < 100; ++trial) {
        const int K = 2 + static_cast<int>(rng.below(4));
        const int D = 1 + static_cast<int>(rng.below(8));
        const std::size_t n = 1 + rng.below(6);
        Crf crf = random_crf(rng, K, D);
        auto x = random_input(rng, n, D);
        auto [logz, argmax] = oracle_enumerate(crf, x, n);
        CHECK(crf.viterbi(x.data(), n) == argmax);

        // The decoded score never exceeds the log partition.
        CHECK(crf.sequence_score(x.data(), n, argmax) <= logz + 1e-9);
    }
}

TEST_CASE("a dominant pair score forces the decoded path") {
    Crf crf(3, 2);
    // Build psi by bias alone: force 2 at position 0, then 0, then 1.
    auto set_bias = [&](int prev, int cur, float v) {
        crf.bias().v[static_cast<std::size_t>(prev) * 3 +
                     static_cast<std::size_t>(cur)] = v;
    };
    set_bias(crf.bos(), 2, 10.0f);
    set_bias(2, 0, 10.0f);
    set_bias(0, 1, 10.0f);
    std::vector<float> x(3 * 2, 0.0f);
    CHECK(crf.viterbi(x.data(), 3) == std::vector<int>{2, 0, 1});
}

TEST_CASE("probabilities normalize over all sequences") {
    Rng rng(8);
    Crf crf = random_crf(rng, 3, 3);
    auto x = random_input(rng, 4, 3);
    const double logz = crf.log_partition(x.data(), 4);
    double total = 0.0;
    std::vector<int> y(4, 0);
    while (true) {
        total += std::exp(crf.sequence_score(x.data(), 4, y) - logz);
        std::size_t pos = 0;
        while (pos < 4 && ++y[pos] == 3) {
            y[pos] = 0;
            ++pos;
        }
        if (pos == 4) break;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("log partition dominates every sequence score") {
    Rng rng(9);
    Crf crf = random_crf(rng, 4, 3);
    auto x = random_input(rng, 5, 3);
    const double logz = crf.log_partition(x.data(), 5);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<int> y(5);
        for (auto& v : y) v = static_cast<int>(rng.below(4));
        CHECK(crf.sequence_score(x.data(), 5, y) < logz);
    }
}

TEST_CASE("nll at a near-deterministic optimum has a tiny gradient") {
    Crf crf(2, 2);
    // One token, gold label 0 with probability ~ 1: a large begin-row bias.
    crf.bias().v[static_cast<std::size_t>(crf.bos()) * 2 + 0] = 50.0f;
    crf.bias().v[static_cast<std::size_t>(crf.bos()) * 2 + 1] = -50.0f;
    std::vector<float> x(2, 0.3f);
    std::vector<float> dx(2);
    crf.zero_grad();
    const double loss = crf.nll_and_gradient(x.data(), 1, {0}, dx.data());
    CHECK(loss < 1e-6);
    double norm = 0.0;
    for (float g : crf.weights_grad().v) norm += std::abs(g);
    for (float g : crf.bias_grad().v) norm += std::abs(g);
    for (float g : dx) norm += std::abs(g);
    CHECK(norm < 1e-6);
}

TEST_CASE("gradients are additive over identical examples") {
    Rng rng(13);
    Crf crf = random_crf(rng, 3, 4, 0.4f);
    auto x = random_input(rng, 4, 4);
    std::vector<int> y = {2, 0, 1, 1};

    crf.zero_grad();
    crf.nll_and_gradient(x.data(), 4, y, nullptr);
    Tensor single_w = crf.weights_grad();
    Tensor single_b = crf.bias_grad();

    crf.zero_grad();
    crf.nll_and_gradient(x.data(), 4, y, nullptr);
    crf.nll_and_gradient(x.data(), 4, y, nullptr);
    for (std::size_t i = 0; i < single_w.size(); ++i)
        CHECK(crf.weights_grad().v[i] ==
              doctest::Approx(2.0f * single_w.v[i]).epsilon(1e-5));
    for (std::size_t i = 0; i < single_b.size(); ++i)
        CHECK(crf.bias_grad().v[i] ==
              doctest::Approx(2.0f * single_b.v[i]).epsilon(1e-5));
}

TEST_CASE("analytic gradients match central finite differences") {
    Rng rng(42007);
    const int K = 3, D = 5;
    const std::size_t n = 4;
    Crf crf = random_crf(rng, K, D, 0.5f);
    std::vector<float> x = random_input(rng, n, D);
    std::vector<int> y = {1, 0, 2, 1};

    std::vector<float> dx(n * D, 0.0f);
    crf.zero_grad();
    crf.nll_and_gradient(x.data(), n, y, dx.data());

    auto loss_at = [&]() {
        return crf.log_partition(x.data(), n) -
               crf.sequence_score(x.data(), n, y);
    };
    const float eps = 1e-5f;
    auto check_component = [&](float& slot, double analytic) {
        const float saved = slot;
        slot = saved + eps;
        const double plus = loss_at();
        const double hi = static_cast<double>(slot);
        slot = saved - eps;
        const double minus = loss_at();
        const double lo = static_cast<double>(slot);
        slot = saved;
        const double fd = (plus - minus) / (hi - lo);
        const double denom = std::max(std::abs(analytic), std::abs(fd));
        if (denom > 1e-7) CHECK(std::abs(analytic - fd) / denom <= 1e-4);
    };

    for (std::size_t i = 0; i < crf.weights().size(); ++i)
        check_component(crf.weights().v[i],
                        static_cast<double>(crf.weights_grad().v[i]));
    for (std::size_t i = 0; i < crf.bias().size(); ++i)
        check_component(crf.bias().v[i],
                        static_cast<double>(crf.bias_grad().v[i]));
    for (std::size_t i = 0; i < x.size(); ++i)
        check_component(x[i], static_cast<double>(dx[i]));
}

TEST_CASE("decoding is invariant to a constant shift of one position") {
    Rng rng(77);
    Crf crf = random_crf(rng, 4, 3);
    auto x = random_input(rng, 5, 3);
    auto psi = crf.pair_scores(x.data(), 5);
    auto base = Crf::viterbi_scores(psi, 5, 4);

    const std::size_t pairs = 5 * 4;
    for (std::size_t i = 0; i < 5; ++i) {
        auto shifted = psi;
        for (std::size_t p = 0; p < pairs; ++p) shifted[i * pairs + p] += 3.25;
        CHECK(Crf::viterbi_scores(shifted, 5, 4) == base);
    }
}

}  // TEST_SUITE
