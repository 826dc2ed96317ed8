#include "deft/heads.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "deft/error.hpp"
#include "deft/kernels.hpp"
#include "deft/numeric.hpp"

namespace deft {

ClassifierHead::ClassifierHead(int d_in, int hidden)
    : d_in_(d_in),
      hidden_(hidden),
      l1_(static_cast<std::size_t>(hidden), static_cast<std::size_t>(d_in)),
      l2_(1, static_cast<std::size_t>(hidden)) {}

void ClassifierHead::init(std::uint64_t seed) {
    Rng r1 = Rng::stream(seed, "init.cls.l1");
    l1_.init(r1);
    Rng r2 = Rng::stream(seed, "init.cls.l2");
    l2_.init(r2);
}

double ClassifierHead::forward(const float* pooled, Cache& cache) const {
    cache.input.assign(pooled, pooled + d_in_);
    cache.h_pre = Tensor({static_cast<std::size_t>(hidden_)});
    cache.h = Tensor({static_cast<std::size_t>(hidden_)});
    l1_.forward(pooled, cache.h_pre.data());
    kernels::relu(cache.h_pre.data(), cache.h.data(),
                  static_cast<std::size_t>(hidden_));
    float logit = 0.0f;
    l2_.forward(cache.h.data(), &logit);
    cache.logit = logit;
    return sigmoid(static_cast<double>(logit));
}

void ClassifierHead::backward(const Cache& cache, float dlogit,
                              float* dpooled) {
    std::vector<float> dh(static_cast<std::size_t>(hidden_));
    l2_.backward(cache.h.data(), &dlogit, dh.data());
    std::vector<float> dh_pre(static_cast<std::size_t>(hidden_));
    kernels::relu_grad(cache.h_pre.data(), dh.data(), dh_pre.data(),
                       static_cast<std::size_t>(hidden_));
    l1_.backward(cache.input.data(), dh_pre.data(), dpooled);
}

void ClassifierHead::zero_grad() {
    l1_.zero_grad();
    l2_.zero_grad();
}

SoftmaxHead::SoftmaxHead(int categories, int d_in)
    : categories_(categories),
      d_in_(d_in),
      proj_(static_cast<std::size_t>(categories),
            static_cast<std::size_t>(d_in)) {}

void SoftmaxHead::init(std::uint64_t seed, const char* name) {
    Rng r = Rng::stream(seed, name);
    proj_.init(r);
}

double SoftmaxHead::loss_and_gradient(const float* x, std::size_t n,
                                      const std::vector<int>& gold,
                                      float scale, float* dx) {
    if (gold.size() != n)
        throw DataError("gold category sequence length mismatch");
    const std::size_t C = static_cast<std::size_t>(categories_);
    const std::size_t D = static_cast<std::size_t>(d_in_);
    std::vector<float> logits(C);
    std::vector<double> dlogits(C);
    std::vector<float> dlogits_f(C);
    std::vector<float> dxi(D);
    double total = 0.0;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const float* xi = x + i * D;
        proj_.forward(xi, logits.data());
        for (std::size_t c = 0; c < C; ++c)
            dlogits[c] = static_cast<double>(logits[c]);
        const double lse = logsumexp(dlogits.data(), C);
        total += lse - static_cast<double>(logits[gold[i]]);
        if (dx == nullptr && scale == 0.0f) continue;
        for (std::size_t c = 0; c < C; ++c) {
            double soft = std::exp(dlogits[c] - lse);
            if (static_cast<int>(c) == gold[i]) soft -= 1.0;
            dlogits_f[c] = static_cast<float>(soft * inv_n) * scale;
        }
        proj_.backward(xi, dlogits_f.data(), dxi.data());
        if (dx != nullptr)
            kernels::axpy(1.0f, dxi.data(), dx + i * D, D);
    }
    return total * inv_n;
}

std::vector<int> SoftmaxHead::predict(const float* x, std::size_t n) const {
    const std::size_t C = static_cast<std::size_t>(categories_);
    const std::size_t D = static_cast<std::size_t>(d_in_);
    std::vector<float> logits(C);
    std::vector<int> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        proj_.forward(x + i * D, logits.data());
        std::size_t best = 0;
        for (std::size_t c = 1; c < C; ++c)
            if (logits[c] > logits[best]) best = c;
        out[i] = static_cast<int>(best);
    }
    return out;
}

std::vector<std::vector<int>> window_id_categories(const ContextWindow& w,
                                                   std::size_t* overflow) {
    std::vector<int> seen;  // distinct ids, by first occurrence
    std::vector<std::vector<int>> out;
    for (const auto& s : w.sentences) {
        std::vector<int> cats;
        cats.reserve(s.tokens.size());
        for (const auto& t : s.tokens) {
            if (t.tag_id == 0) {
                cats.push_back(kIdNone);
                continue;
            }
            auto it = std::find(seen.begin(), seen.end(), t.tag_id);
            std::size_t slot;
            if (it == seen.end()) {
                slot = seen.size();
                seen.push_back(t.tag_id);
            } else {
                slot = static_cast<std::size_t>(it - seen.begin());
            }
            if (slot >= kMaxTagSlots) {
                if (overflow != nullptr) ++*overflow;
                cats.push_back(kIdNone);
            } else {
                cats.push_back(static_cast<int>(slot));
            }
        }
        out.push_back(std::move(cats));
    }
    return out;
}

void assign_tag_ids(ContextWindow& w,
                    const std::vector<std::vector<int>>& token_categories) {
    if (token_categories.size() != w.sentences.size())
        throw DataError("tag-id categories do not match sentence count");
    // Distinct predicted slots get ids 1, 2, ... in order of first occurrence
    // within the window; the none category stays 0.
    std::vector<int> slot_to_id(kMaxTagSlots, 0);
    int next_id = 1;
    for (std::size_t s = 0; s < w.sentences.size(); ++s) {
        auto& sentence = w.sentences[s];
        if (token_categories[s].size() != sentence.tokens.size())
            throw DataError("tag-id categories do not match token count");
        for (std::size_t t = 0; t < sentence.tokens.size(); ++t) {
            int cat = token_categories[s][t];
            if (cat == kIdNone) {
                sentence.tokens[t].tag_id = 0;
                continue;
            }
            if (slot_to_id[static_cast<std::size_t>(cat)] == 0)
                slot_to_id[static_cast<std::size_t>(cat)] = next_id++;
            sentence.tokens[t].tag_id = slot_to_id[static_cast<std::size_t>(cat)];
        }
    }
}

}  // namespace deft
