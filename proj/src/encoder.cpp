#include "deft/encoder.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "deft/error.hpp"
#include "deft/kernels.hpp"

namespace deft {

namespace {

std::vector<std::string_view> split_spaces(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && s[i] == ' ') ++i;
        std::size_t start = i;
        while (i < s.size() && s[i] != ' ') ++i;
        if (i > start) out.push_back(s.substr(start, i - start));
    }
    return out;
}

float parse_float(std::string_view field, std::size_t line_no) {
    float value = 0.0f;
    auto [ptr, ec] =
        std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size())
        throw ParseError("embedding file line " + std::to_string(line_no) +
                         ": bad float '" + std::string(field) + "'");
    return value;
}

}  // namespace

ExternalEmbeddings ExternalEmbeddings::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path.string() + "'");

    ExternalEmbeddings ext;
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line))
        throw ParseError(path.string() + ": empty embedding file");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = split_spaces(line);
    if (header.size() != 2)
        throw ParseError(path.string() +
                         ": header must be '<num_sentences> <d_emb>'");
    std::size_t num_sentences = 0;
    {
        auto [p1, e1] = std::from_chars(
            header[0].data(), header[0].data() + header[0].size(),
            num_sentences);
        int d = 0;
        auto [p2, e2] = std::from_chars(
            header[1].data(), header[1].data() + header[1].size(), d);
        if (e1 != std::errc() || e2 != std::errc() || d <= 0)
            throw ParseError(path.string() + ": bad header '" + line + "'");
        ext.d_emb = d;
    }

    std::vector<std::string> texts;
    std::vector<float> values;
    auto flush = [&] {
        if (texts.empty()) return;
        Tensor block({texts.size(), static_cast<std::size_t>(ext.d_emb)});
        std::copy(values.begin(), values.end(), block.v.begin());
        ext.vectors.push_back(std::move(block));
        ext.piece_texts.push_back(std::move(texts));
        texts.clear();
        values.clear();
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            flush();
            continue;
        }
        auto fields = split_spaces(line);
        if (fields.size() != static_cast<std::size_t>(ext.d_emb) + 1)
            throw ParseError(path.string() + ": line " +
                             std::to_string(line_no) + ": expected piece + " +
                             std::to_string(ext.d_emb) + " floats");
        texts.emplace_back(fields[0]);
        for (std::size_t k = 1; k < fields.size(); ++k)
            values.push_back(parse_float(fields[k], line_no));
    }
    flush();

    if (ext.vectors.size() != num_sentences)
        throw DataError(path.string() + ": header declares " +
                        std::to_string(num_sentences) + " sentences, found " +
                        std::to_string(ext.vectors.size()));
    return ext;
}

void ExternalEmbeddings::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << vectors.size() << ' ' << d_emb << '\n';
    char buf[64];
    for (std::size_t s = 0; s < vectors.size(); ++s) {
        if (s > 0) out << '\n';
        for (std::size_t i = 0; i < piece_texts[s].size(); ++i) {
            out << piece_texts[s][i];
            const float* row = vectors[s].row(i);
            for (int d = 0; d < d_emb; ++d) {
                std::snprintf(buf, sizeof(buf), " %.9g",
                              static_cast<double>(row[d]));
                out << buf;
            }
            out << '\n';
        }
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

const Tensor& ExternalEmbeddings::block(
    std::size_t index, const std::vector<std::string>& pieces) const {
    if (index >= vectors.size())
        throw DataError("embedding file has no block for sentence " +
                        std::to_string(index));
    if (piece_texts[index].size() != pieces.size())
        throw DataError("embedding block for sentence " +
                        std::to_string(index) + " has " +
                        std::to_string(piece_texts[index].size()) +
                        " rows, tokenizer produced " +
                        std::to_string(pieces.size()));
    for (std::size_t i = 0; i < pieces.size(); ++i)
        if (piece_texts[index][i] != pieces[i])
            throw DataError("embedding block for sentence " +
                            std::to_string(index) + " piece " +
                            std::to_string(i) + " is '" +
                            piece_texts[index][i] + "', tokenizer produced '" +
                            pieces[i] + "'");
    return vectors[index];
}

Encoder::Encoder(const EncoderConfig& cfg)
    : cfg_(cfg),
      table_({cfg.vocab_size, static_cast<std::size_t>(cfg.d_emb)}),
      gtable_(table_.shape),
      l1_(static_cast<std::size_t>(cfg.hidden),
          static_cast<std::size_t>(cfg.d_emb)),
      lo_(static_cast<std::size_t>(cfg.d_out),
          static_cast<std::size_t>(cfg.hidden)) {
    if (cfg.hidden_layers == 2)
        l2_ = Linear(static_cast<std::size_t>(cfg.hidden),
                     static_cast<std::size_t>(cfg.hidden));
    drop_.p = cfg.dropout;
}

void Encoder::init(std::uint64_t seed) {
    Rng table_rng = Rng::stream(seed, "init.encoder.table");
    table_.fill_uniform(table_rng, -0.05f, 0.05f);
    Rng l1_rng = Rng::stream(seed, "init.encoder.l1");
    l1_.init(l1_rng);
    if (cfg_.hidden_layers == 2) {
        Rng l2_rng = Rng::stream(seed, "init.encoder.l2");
        l2_.init(l2_rng);
    }
    Rng lo_rng = Rng::stream(seed, "init.encoder.out");
    lo_.init(lo_rng);
}

void Encoder::forward(const std::vector<int>& ids, const Tensor* external,
                      bool training, Rng& dropout_rng, Cache& cache) const {
    const std::size_t n = ids.size();
    const std::size_t demb = static_cast<std::size_t>(cfg_.d_emb);
    const std::size_t hidden = static_cast<std::size_t>(cfg_.hidden);
    const std::size_t dout = static_cast<std::size_t>(cfg_.d_out);

    cache.n = n;
    cache.ids = ids;
    cache.e = Tensor({n, demb});
    cache.h1_pre = Tensor({n, hidden});
    cache.h1 = Tensor({n, hidden});
    cache.mask1 = Tensor({n, hidden});
    if (cfg_.hidden_layers == 2) {
        cache.h2_pre = Tensor({n, hidden});
        cache.h2 = Tensor({n, hidden});
        cache.mask2 = Tensor({n, hidden});
    }
    cache.out = Tensor({n, dout});

    cache.external = external != nullptr;
    if (external != nullptr) {
        if (external->shape[0] != n || external->shape[1] != demb)
            throw DataError("external embedding block shape mismatch");
        cache.e.v = external->v;
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            int id = ids[i];
            if (id < 0 || static_cast<std::size_t>(id) >= cfg_.vocab_size)
                throw DataError("subword id " + std::to_string(id) +
                                " out of range");
            std::memcpy(cache.e.row(i), table_.row(static_cast<std::size_t>(id)),
                        demb * sizeof(float));
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        l1_.forward(cache.e.row(i), cache.h1_pre.row(i));
        kernels::relu(cache.h1_pre.row(i), cache.h1.row(i), hidden);
        if (training)
            drop_.apply(dropout_rng, cache.h1.row(i), cache.mask1.row(i),
                        hidden);
        const float* top = cache.h1.row(i);
        if (cfg_.hidden_layers == 2) {
            l2_.forward(top, cache.h2_pre.row(i));
            kernels::relu(cache.h2_pre.row(i), cache.h2.row(i), hidden);
            if (training)
                drop_.apply(dropout_rng, cache.h2.row(i), cache.mask2.row(i),
                            hidden);
            top = cache.h2.row(i);
        }
        lo_.forward(top, cache.out.row(i));
    }
}

void Encoder::backward(Cache& cache, const float* dout) {
    const std::size_t n = cache.n;
    const std::size_t demb = static_cast<std::size_t>(cfg_.d_emb);
    const std::size_t hidden = static_cast<std::size_t>(cfg_.hidden);
    const std::size_t dout_dim = static_cast<std::size_t>(cfg_.d_out);

    std::vector<float> dh(hidden), dh_pre(hidden), de(demb);
    for (std::size_t i = 0; i < n; ++i) {
        const float* dyi = dout + i * dout_dim;
        const float* top = cfg_.hidden_layers == 2 ? cache.h2.row(i)
                                                   : cache.h1.row(i);
        lo_.backward(top, dyi, dh.data());

        if (cfg_.hidden_layers == 2) {
            for (std::size_t k = 0; k < hidden; ++k)
                dh[k] *= cache.mask2.row(i)[k];
            kernels::relu_grad(cache.h2_pre.row(i), dh.data(), dh_pre.data(),
                               hidden);
            l2_.backward(cache.h1.row(i), dh_pre.data(), dh.data());
        }

        for (std::size_t k = 0; k < hidden; ++k)
            dh[k] *= cache.mask1.row(i)[k];
        kernels::relu_grad(cache.h1_pre.row(i), dh.data(), dh_pre.data(),
                           hidden);
        l1_.backward(cache.e.row(i), dh_pre.data(), de.data());

        if (cfg_.train_table && !cache.external)
            kernels::axpy(1.0f, de.data(),
                          gtable_.row(static_cast<std::size_t>(cache.ids[i])),
                          demb);
    }
}

void Encoder::zero_grad() {
    gtable_.zero();
    l1_.zero_grad();
    if (cfg_.hidden_layers == 2) l2_.zero_grad();
    lo_.zero_grad();
}

}  // namespace deft
