#include "deft/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "deft/error.hpp"
#include "deft/eval.hpp"
#include "deft/kernels.hpp"

namespace deft {

namespace {

std::vector<std::size_t> index_range(std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    return idx;
}

void scale_grads(const std::vector<ParamRef>& params, float scale) {
    for (const auto& p : params)
        for (auto& g : p.grad->v) g *= scale;
}

class TraceWriter {
public:
    explicit TraceWriter(const std::filesystem::path& dir) {
        if (dir.empty()) return;
        std::filesystem::create_directories(dir);
        path_ = dir / "trace.tsv";
        std::ofstream fresh(path_, std::ios::binary | std::ios::trunc);
        if (!fresh) throw IoError("cannot write '" + path_.string() + "'");
    }

    void append(int epoch, double train_loss, double dev_metric) {
        if (path_.empty()) return;
        std::ofstream out(path_, std::ios::binary | std::ios::app);
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%d\t%.9g\t%.9g\n", epoch, train_loss,
                      dev_metric);
        out << buf;
        if (!out) throw IoError("write failed for '" + path_.string() + "'");
    }

private:
    std::filesystem::path path_;
};

const Tensor* external_block(const ExternalEmbeddings* ext, std::size_t index,
                             const std::vector<SubwordPiece>& pieces) {
    if (ext == nullptr) return nullptr;
    std::vector<std::string> texts;
    texts.reserve(pieces.size());
    for (const auto& p : pieces) texts.push_back(p.text);
    return &ext->block(index, texts);
}

const Tensor* external_block_task1(const ExternalEmbeddings* ext,
                                   std::size_t index,
                                   const std::vector<std::string>& texts) {
    if (ext == nullptr) return nullptr;
    return &ext->block(index, texts);
}

}  // namespace

void TrainConfig::validate() const {
    if (lr <= 0.0) throw ConfigError("learning rate must be > 0");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("batch size must be >= 1");
    if (lambdas.lambda1 < 0.0 || lambdas.lambda2 < 0.0 || lambdas.lambda3 < 0.0)
        throw ConfigError("loss weights must be non-negative");
    if (hidden_layers != 1 && hidden_layers != 2)
        throw ConfigError("hidden_layers must be 1 or 2");
    if (d_emb < 1 || d_out < 1 || hidden < 1)
        throw ConfigError("model dimensions must be >= 1");
}

void Adam::step(const std::vector<ParamRef>& params) {
    if (m_.empty()) {
        for (const auto& p : params) {
            m_.emplace_back(p.value->shape);
            v_.emplace_back(p.value->shape);
        }
    }
    ++t_;
    const float inv_bc1 =
        1.0f / (1.0f - std::pow(kBeta1, static_cast<float>(t_)));
    const float inv_bc2 =
        1.0f / (1.0f - std::pow(kBeta2, static_cast<float>(t_)));
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!params[i].trainable) continue;
        if (!params[i].value->same_shape(m_[i]))
            throw DataError("optimizer state shape mismatch for '" +
                            params[i].name + "'");
        kernels::adam_update(params[i].value->data(), m_[i].data(),
                             v_[i].data(), params[i].grad->data(),
                             params[i].value->size(), static_cast<float>(lr_),
                             kBeta1, kBeta2, kEps, inv_bc1, inv_bc2);
    }
}

std::vector<int> tag_eval_labels() {
    std::vector<int> out;
    for (int l = 1; l < TagVocabulary::kNumLabels; ++l) out.push_back(l);
    return out;
}

double positive_f1(const std::vector<bool>& gold,
                   const std::vector<bool>& pred) {
    EvalReport r = sentence_metrics(gold, pred);
    return r.f1[1];
}

double tag_macro_f1(const std::vector<std::vector<int>>& gold,
                    const std::vector<std::vector<int>>& pred) {
    EvalReport r =
        compute_metrics(gold, pred, tag_eval_labels(), TagVocabulary::labels());
    return r.macro_f1;
}

std::vector<int> sentence_ids(const SubwordVocabulary& vocab,
                              std::string_view text) {
    std::vector<int> ids;
    ids.push_back(vocab.seq_start_id());
    auto pieces = vocab.tokenize(text);
    auto piece_ids = vocab.ids(pieces);
    ids.insert(ids.end(), piece_ids.begin(), piece_ids.end());
    return ids;
}

std::vector<std::vector<int>> gold_token_tags(
    const std::vector<ContextWindow>& windows) {
    std::vector<std::vector<int>> out;
    for (const auto& w : windows)
        for (const auto& s : w.sentences) {
            std::vector<int> tags;
            tags.reserve(s.tokens.size());
            for (const auto& t : s.tokens) tags.push_back(t.tag);
            out.push_back(std::move(tags));
        }
    return out;
}

ModelConfig model_config(const TrainConfig& cfg, std::size_t vocab_size,
                         bool external_source) {
    ModelConfig m;
    m.vocab_size = vocab_size;
    m.d_emb = cfg.d_emb;
    m.hidden = cfg.hidden;
    m.d_out = cfg.d_out;
    m.hidden_layers = cfg.hidden_layers;
    m.dropout = cfg.dropout();
    m.finetune = cfg.finetune();
    m.external_source = external_source;
    m.lambdas = cfg.lambdas;
    return m;
}

Manifest make_manifest(const TrainConfig& cfg, const SubwordVocabulary& vocab,
                       bool external_source, int epoch, double dev_metric) {
    Manifest m;
    m.epoch = epoch;
    m.dev_metric = dev_metric;
    char buf[64];
    auto num = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    m.config.emplace_back("task", cfg.task == Task::Sentence     ? "1"
                                  : cfg.task == Task::Tokens     ? "2"
                                                                 : "multitask");
    m.config.emplace_back("mode", std::string(to_string(cfg.mode)));
    m.config.emplace_back("lr", num(cfg.lr));
    m.config.emplace_back("epochs", std::to_string(cfg.epochs));
    m.config.emplace_back("batch_size", std::to_string(cfg.batch_size));
    m.config.emplace_back("seed", std::to_string(cfg.seed));
    m.config.emplace_back("lambda1", num(cfg.lambdas.lambda1));
    m.config.emplace_back("lambda2", num(cfg.lambdas.lambda2));
    m.config.emplace_back("lambda3", num(cfg.lambdas.lambda3));
    m.config.emplace_back("d_emb", std::to_string(cfg.d_emb));
    m.config.emplace_back("d_out", std::to_string(cfg.d_out));
    m.config.emplace_back("hidden", std::to_string(cfg.hidden));
    m.config.emplace_back("hidden_layers", std::to_string(cfg.hidden_layers));
    m.config.emplace_back("dropout",
                          num(static_cast<double>(cfg.dropout())));
    m.config.emplace_back("vocab_size", std::to_string(vocab.size()));
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(vocab.content_hash()));
    m.config.emplace_back("vocab_hash", buf);
    m.config.emplace_back("embedding_source",
                          external_source ? "external" : "internal");
    return m;
}

TrainResult train_task1(const TrainConfig& cfg, const SubwordVocabulary& vocab,
                        const std::vector<SentenceExample>& train,
                        const std::vector<SentenceExample>& dev,
                        const ExternalEmbeddings* train_ext,
                        const ExternalEmbeddings* dev_ext) {
    cfg.validate();
    if (train.empty()) throw ConfigError("training data is empty");
    if (dev.empty()) throw ConfigError("dev data is empty");

    struct Item {
        std::vector<int> ids;
        std::vector<std::string> piece_texts;
        bool label;
    };
    auto encode = [&](const std::vector<SentenceExample>& exs) {
        std::vector<Item> items;
        items.reserve(exs.size());
        for (const auto& e : exs) {
            Item it;
            it.ids = sentence_ids(vocab, e.text);
            it.piece_texts.emplace_back(SubwordVocabulary::kSequenceStart);
            for (const auto& p : vocab.tokenize(e.text))
                it.piece_texts.push_back(p.text);
            it.label = e.label;
            items.push_back(std::move(it));
        }
        return items;
    };
    const std::vector<Item> train_items = encode(train);
    const std::vector<Item> dev_items = encode(dev);

    Task1Model model(model_config(cfg, vocab.size(), train_ext != nullptr));
    model.init(cfg.seed);
    const std::vector<ParamRef> params = model.parameters();

    Adam adam(cfg.lr);
    Rng shuffle_rng = Rng::stream(cfg.seed, "shuffle");
    Rng dropout_rng = Rng::stream(cfg.seed, "dropout");
    TraceWriter trace(cfg.checkpoint_dir);
    TrainResult result;

    std::vector<bool> dev_gold;
    for (const auto& it : dev_items) dev_gold.push_back(it.label);

    auto indices = index_range(train_items.size());
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(indices);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < indices.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop =
                std::min(indices.size(),
                         start + static_cast<std::size_t>(cfg.batch_size));
            model.zero_grad();
            for (std::size_t k = start; k < stop; ++k) {
                const Item& it = train_items[indices[k]];
                const Tensor* ext = external_block_task1(
                    train_ext, indices[k], it.piece_texts);
                epoch_loss += model.train_loss(it.ids, it.label, ext,
                                               dropout_rng);
            }
            scale_grads(params, 1.0f / static_cast<float>(stop - start));
            adam.step(params);
        }
        epoch_loss /= static_cast<double>(train_items.size());

        std::vector<bool> dev_pred;
        dev_pred.reserve(dev_items.size());
        for (std::size_t i = 0; i < dev_items.size(); ++i) {
            const Tensor* ext = external_block_task1(dev_ext, i,
                                                     dev_items[i].piece_texts);
            dev_pred.push_back(ClassifierHead::decide(
                model.predict(dev_items[i].ids, ext)));
        }
        const double metric = positive_f1(dev_gold, dev_pred);

        trace.append(epoch, epoch_loss, metric);
        result.train_loss_trace.push_back(epoch_loss);
        result.dev_metric_trace.push_back(metric);
        if (epoch == 1 || metric > result.best_metric) {
            result.best_metric = metric;
            result.best_epoch = epoch;
            if (!cfg.checkpoint_dir.empty())
                save_checkpoint(cfg.checkpoint_dir, params,
                                make_manifest(cfg, vocab, train_ext != nullptr,
                                              epoch, metric));
        }
    }
    return result;
}

namespace {

// Shared loop for task 2 and the multi-task setting.
template <class Model, class LossFn, class PredictFn>
TrainResult run_sequence_training(const TrainConfig& cfg,
                                  const SubwordVocabulary& vocab,
                                  const std::vector<EncodedSentence>& train,
                                  const std::vector<EncodedSentence>& dev,
                                  const std::vector<std::vector<int>>& dev_gold,
                                  Model& model, LossFn&& loss_fn,
                                  PredictFn&& predict_fn,
                                  const ExternalEmbeddings* train_ext,
                                  const ExternalEmbeddings* dev_ext,
                                  bool external_source) {
    const std::vector<ParamRef> params = model.parameters();
    Adam adam(cfg.lr);
    Rng shuffle_rng = Rng::stream(cfg.seed, "shuffle");
    Rng dropout_rng = Rng::stream(cfg.seed, "dropout");
    TraceWriter trace(cfg.checkpoint_dir);
    TrainResult result;

    auto indices = index_range(train.size());
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(indices);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < indices.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop =
                std::min(indices.size(),
                         start + static_cast<std::size_t>(cfg.batch_size));
            SequenceBatch batch = SequenceBatch::from(
                train,
                std::vector<std::size_t>(indices.begin() +
                                             static_cast<std::ptrdiff_t>(start),
                                         indices.begin() +
                                             static_cast<std::ptrdiff_t>(stop)),
                vocab.pad_id());
            model.zero_grad();
            for (std::size_t row = 0; row < batch.rows; ++row) {
                const EncodedSentence& item = train[batch.item[row]];
                const Tensor* ext =
                    external_block(train_ext, batch.item[row], item.pieces);
                epoch_loss += loss_fn(model, item, ext, dropout_rng);
            }
            scale_grads(params, 1.0f / static_cast<float>(batch.rows));
            adam.step(params);
        }
        epoch_loss /= static_cast<double>(train.size());

        std::vector<std::vector<int>> dev_pred;
        dev_pred.reserve(dev.size());
        for (std::size_t i = 0; i < dev.size(); ++i) {
            const Tensor* ext = external_block(dev_ext, i, dev[i].pieces);
            std::vector<int> piece_labels = predict_fn(model, dev[i], ext);
            dev_pred.push_back(resolve_labels(piece_labels, dev[i].alignment));
        }
        const double metric = tag_macro_f1(dev_gold, dev_pred);

        trace.append(epoch, epoch_loss, metric);
        result.train_loss_trace.push_back(epoch_loss);
        result.dev_metric_trace.push_back(metric);
        if (epoch == 1 || metric > result.best_metric) {
            result.best_metric = metric;
            result.best_epoch = epoch;
            if (!cfg.checkpoint_dir.empty())
                save_checkpoint(cfg.checkpoint_dir, params,
                                make_manifest(cfg, vocab, external_source,
                                              epoch, metric));
        }
    }
    return result;
}

}  // namespace

TrainResult train_sequence(const TrainConfig& cfg,
                           const SubwordVocabulary& vocab,
                           const std::vector<ContextWindow>& train,
                           const std::vector<ContextWindow>& dev,
                           const ExternalEmbeddings* train_ext,
                           const ExternalEmbeddings* dev_ext) {
    cfg.validate();
    if (train.empty()) throw ConfigError("training data is empty");
    if (dev.empty()) throw ConfigError("dev data is empty");

    const std::vector<EncodedSentence> train_enc = encode_corpus(train, vocab);
    const std::vector<EncodedSentence> dev_enc = encode_corpus(dev, vocab);
    const std::vector<std::vector<int>> dev_gold = gold_token_tags(dev);
    const bool external_source = train_ext != nullptr;

    if (cfg.task == Task::Multitask) {
        MultitaskModel model(model_config(cfg, vocab.size(), external_source));
        model.init(cfg.seed);
        return run_sequence_training(
            cfg, vocab, train_enc, dev_enc, dev_gold, model,
            [](MultitaskModel& m, const EncodedSentence& item,
               const Tensor* ext, Rng& rng) {
                return m.train_loss(item, ext, rng);
            },
            [](MultitaskModel& m, const EncodedSentence& item,
               const Tensor* ext) { return m.predict(item, ext).piece_tags; },
            train_ext, dev_ext, external_source);
    }

    Task2Model model(model_config(cfg, vocab.size(), external_source));
    model.init(cfg.seed);
    return run_sequence_training(
        cfg, vocab, train_enc, dev_enc, dev_gold, model,
        [](Task2Model& m, const EncodedSentence& item, const Tensor* ext,
           Rng& rng) { return m.train_loss(item, ext, rng); },
        [](Task2Model& m, const EncodedSentence& item, const Tensor* ext) {
            return m.predict_piece_labels(item, ext);
        },
        train_ext, dev_ext, external_source);
}

}  // namespace deft
