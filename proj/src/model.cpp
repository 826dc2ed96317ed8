#include "deft/model.hpp"

#include <cmath>

#include "deft/error.hpp"
#include "deft/kernels.hpp"
#include "deft/numeric.hpp"

namespace deft {

namespace {

EncoderConfig encoder_config(const ModelConfig& cfg) {
    EncoderConfig e;
    e.vocab_size = cfg.vocab_size;
    e.d_emb = cfg.d_emb;
    e.hidden = cfg.hidden;
    e.d_out = cfg.d_out;
    e.hidden_layers = cfg.hidden_layers;
    e.dropout = cfg.dropout;
    e.train_table = cfg.finetune && !cfg.external_source;
    return e;
}

void push_linear(std::vector<ParamRef>& out, Linear& l, const std::string& name) {
    out.push_back({name + ".W", &l.W, &l.gW, true});
    out.push_back({name + ".b", &l.b, &l.gb, true});
}

}  // namespace

std::vector<ParamRef> encoder_params(Encoder& enc, const ModelConfig& cfg) {
    std::vector<ParamRef> out;
    if (!cfg.external_source)
        out.push_back({"embedding.table", &enc.table(), &enc.table_grad(),
                       cfg.finetune});
    push_linear(out, enc.layer1(), "encoder.l1");
    if (cfg.hidden_layers == 2) push_linear(out, enc.layer2(), "encoder.l2");
    push_linear(out, enc.output_layer(), "encoder.out");
    return out;
}

Task1Model::Task1Model(const ModelConfig& cfg)
    : cfg_(cfg), enc_(encoder_config(cfg)), head_(cfg.d_out, cfg.hidden) {}

void Task1Model::init(std::uint64_t seed) {
    enc_.init(seed);
    head_.init(seed);
}

std::vector<ParamRef> Task1Model::parameters() {
    std::vector<ParamRef> out = encoder_params(enc_, cfg_);
    push_linear(out, head_.layer1(), "cls.l1");
    push_linear(out, head_.layer2(), "cls.l2");
    return out;
}

double Task1Model::train_loss(const std::vector<int>& ids, bool gold,
                              const Tensor* external, Rng& dropout_rng) {
    Encoder::Cache cache;
    enc_.forward(ids, external, /*training=*/true, dropout_rng, cache);
    ClassifierHead::Cache head_cache;
    const double prob = head_.forward(Encoder::pooled(cache), head_cache);
    const double y = gold ? 1.0 : 0.0;
    // Clamped only through the stable sigmoid; BCE via logits.
    const double z = static_cast<double>(head_cache.logit);
    // log(1 + exp(z)) - y z, computed stably.
    const double loss = (z > 0.0 ? z : 0.0) + std::log1p(std::exp(-std::abs(z))) -
                        y * z;

    std::vector<float> dpooled(static_cast<std::size_t>(cfg_.d_out));
    head_.backward(head_cache, static_cast<float>(prob - y), dpooled.data());
    Tensor dout({cache.n, static_cast<std::size_t>(cfg_.d_out)});
    std::copy(dpooled.begin(), dpooled.end(), dout.row(0));
    enc_.backward(cache, dout.data());
    return loss;
}

double Task1Model::predict(const std::vector<int>& ids,
                           const Tensor* external) {
    Encoder::Cache cache;
    enc_.forward(ids, external, /*training=*/false, unused_rng_, cache);
    ClassifierHead::Cache head_cache;
    return head_.forward(Encoder::pooled(cache), head_cache);
}

void Task1Model::zero_grad() {
    enc_.zero_grad();
    head_.zero_grad();
}

Task2Model::Task2Model(const ModelConfig& cfg)
    : cfg_(cfg), enc_(encoder_config(cfg)), crf_(cfg.num_labels, cfg.d_out) {}

void Task2Model::init(std::uint64_t seed) {
    enc_.init(seed);
    Rng crf_rng = Rng::stream(seed, "init.crf.W");
    crf_.init(crf_rng);
}

std::vector<ParamRef> Task2Model::parameters() {
    std::vector<ParamRef> out = encoder_params(enc_, cfg_);
    out.push_back({"crf.W", &crf_.weights(), &crf_.weights_grad(), true});
    out.push_back({"crf.b", &crf_.bias(), &crf_.bias_grad(), true});
    return out;
}

double Task2Model::train_loss(const EncodedSentence& item,
                              const Tensor* external, Rng& dropout_rng) {
    Encoder::Cache cache;
    enc_.forward(item.ids, external, /*training=*/true, dropout_rng, cache);
    Tensor dx({cache.n, static_cast<std::size_t>(cfg_.d_out)});
    const double loss =
        crf_.nll_and_gradient(cache.out.data(), cache.n, item.piece_tags,
                              dx.data());
    enc_.backward(cache, dx.data());
    return loss;
}

std::vector<int> Task2Model::predict_piece_labels(const EncodedSentence& item,
                                                  const Tensor* external) {
    Encoder::Cache cache;
    Rng rng(0);
    enc_.forward(item.ids, external, /*training=*/false, rng, cache);
    return crf_.viterbi(cache.out.data(), cache.n);
}

void Task2Model::zero_grad() {
    enc_.zero_grad();
    crf_.zero_grad();
}

MultitaskModel::MultitaskModel(const ModelConfig& cfg)
    : cfg_(cfg),
      enc_(encoder_config(cfg)),
      crf_(cfg.num_labels, cfg.d_out),
      id_head_(kNumIdCategories, cfg.d_out),
      rel_head_(kNumRelations, cfg.d_out) {}

void MultitaskModel::init(std::uint64_t seed) {
    enc_.init(seed);
    Rng crf_rng = Rng::stream(seed, "init.crf.W");
    crf_.init(crf_rng);
    id_head_.init(seed, "init.id.W");
    rel_head_.init(seed, "init.rel.W");
}

std::vector<ParamRef> MultitaskModel::parameters() {
    std::vector<ParamRef> out = encoder_params(enc_, cfg_);
    out.push_back({"crf.W", &crf_.weights(), &crf_.weights_grad(), true});
    out.push_back({"crf.b", &crf_.bias(), &crf_.bias_grad(), true});
    push_linear(out, id_head_.layer(), "id");
    push_linear(out, rel_head_.layer(), "rel");
    return out;
}

double MultitaskModel::train_loss(const EncodedSentence& item,
                                  const Tensor* external, Rng& dropout_rng) {
    if (item.piece_id_cats.size() != item.ids.size() ||
        item.piece_rel_cats.size() != item.ids.size() ||
        item.piece_tags.size() != item.ids.size())
        throw DataError("head gold sequences are not aligned to the subwords");

    Encoder::Cache cache;
    enc_.forward(item.ids, external, /*training=*/true, dropout_rng, cache);
    Tensor dx({cache.n, static_cast<std::size_t>(cfg_.d_out)});

    const LossWeights& w = cfg_.lambdas;
    double tag_loss = 0.0, id_loss = 0.0, rel_loss = 0.0;
    if (w.lambda1 != 0.0) {
        Tensor dx1(dx.shape);
        tag_loss = crf_.nll_and_gradient(cache.out.data(), cache.n,
                                         item.piece_tags, dx1.data());
        kernels::axpy(static_cast<float>(w.lambda1), dx1.data(), dx.data(),
                      dx.size());
    }
    if (w.lambda2 != 0.0)
        id_loss = id_head_.loss_and_gradient(cache.out.data(), cache.n,
                                             item.piece_id_cats,
                                             static_cast<float>(w.lambda2),
                                             dx.data());
    if (w.lambda3 != 0.0)
        rel_loss = rel_head_.loss_and_gradient(cache.out.data(), cache.n,
                                               item.piece_rel_cats,
                                               static_cast<float>(w.lambda3),
                                               dx.data());
    enc_.backward(cache, dx.data());
    return multitask_loss(tag_loss, id_loss, rel_loss, w);
}

MultitaskModel::Prediction MultitaskModel::predict(const EncodedSentence& item,
                                                   const Tensor* external) {
    Encoder::Cache cache;
    Rng rng(0);
    enc_.forward(item.ids, external, /*training=*/false, rng, cache);
    Prediction p;
    p.piece_tags = crf_.viterbi(cache.out.data(), cache.n);
    p.piece_id_cats = id_head_.predict(cache.out.data(), cache.n);
    p.piece_rel_cats = rel_head_.predict(cache.out.data(), cache.n);
    return p;
}

void MultitaskModel::zero_grad() {
    enc_.zero_grad();
    crf_.zero_grad();
    id_head_.zero_grad();
    rel_head_.zero_grad();
}

}  // namespace deft
