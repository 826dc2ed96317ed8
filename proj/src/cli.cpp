#include "deft/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>

#include "deft/align.hpp"
#include "deft/checkpoint.hpp"
#include "deft/corpus.hpp"
#include "deft/error.hpp"
#include "deft/eval.hpp"
#include "deft/kernels.hpp"
#include "deft/model.hpp"
#include "deft/pipeline.hpp"
#include "deft/preprocess.hpp"
#include "deft/subword.hpp"
#include "deft/train.hpp"

namespace deft::cli {

namespace {

namespace fs = std::filesystem;

constexpr const char* kMarkerName = "prepared.txt";

std::vector<fs::path> corpus_files(const fs::path& dir) {
    if (!fs::is_directory(dir))
        throw ConfigError("input directory '" + dir.string() + "' not found");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".deft")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw ConfigError("no .deft corpus files in '" + dir.string() + "'");
    return files;
}

std::vector<ContextWindow> parse_corpus_dir(const fs::path& dir) {
    std::vector<ContextWindow> all;
    for (const auto& file : corpus_files(dir)) {
        auto windows = parse_deft_file(file);
        for (auto& w : windows) {
            w.window_id = static_cast<int>(all.size());
            all.push_back(std::move(w));
        }
    }
    return all;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Task parse_task(const std::string& name) {
    if (name == "1") return Task::Sentence;
    if (name == "2") return Task::Tokens;
    if (name == "multitask") return Task::Multitask;
    throw ConfigError("unknown task '" + name + "' (expected 1, 2, multitask)");
}

// ---------------------------------------------------------------- prepare --

struct PrepareOpts {
    std::string input;
    std::string output;
    std::string task = "2";
    std::string mode = "finetune";
    std::string factors;
};

void passthrough_prepared(const fs::path& in, const fs::path& out) {
    fs::create_directories(out);
    if (fs::equivalent(in, out)) return;
    for (const auto& entry : fs::directory_iterator(in))
        if (entry.is_regular_file())
            fs::copy_file(entry.path(), out / entry.path().filename(),
                          fs::copy_options::overwrite_existing);
}

int cmd_prepare(const PrepareOpts& opts) {
    const fs::path in(opts.input), out(opts.output);
    const Task task = parse_task(opts.task);
    const CleaningMode mode = cleaning_mode_from(opts.mode);

    if (fs::exists(in / kMarkerName)) {
        // Already prepared; balancing is not re-applied.
        passthrough_prepared(in, out);
        std::cout << "input already prepared; copied through\n";
        return 0;
    }

    const auto windows = parse_corpus_dir(in);
    fs::create_directories(out);
    std::string report;

    if (task == Task::Sentence) {
        std::vector<SentenceExample> examples;
        for (const auto& w : windows)
            for (const auto& s : w.sentences) {
                std::string text = clean_sentence(s.sentence_text, mode);
                if (text.empty()) continue;
                examples.push_back({std::move(text), s.has_definition});
            }
        const auto counts = [](const std::vector<SentenceExample>& v) {
            std::size_t pos = 0;
            for (const auto& e : v) pos += e.label ? 1 : 0;
            return std::pair<std::size_t, std::size_t>(pos, v.size() - pos);
        };
        const auto [pos0, neg0] = counts(examples);
        const auto balanced = balance_task1(examples);
        const auto [pos1, neg1] = counts(balanced);
        write_sentence_file(balanced, out / "task1.tsv");

        char line[160];
        report += "class\tinitial\tfinal\n";
        std::snprintf(line, sizeof(line), "definition\t%zu\t%zu\n", pos0, pos1);
        report += line;
        std::snprintf(line, sizeof(line), "no-definition\t%zu\t%zu\n", neg0,
                      neg1);
        report += line;
    } else {
        const FactorTable table = opts.factors.empty()
                                      ? FactorTable::defaults()
                                      : FactorTable::load(opts.factors);
        const auto cleaned = clean_corpus(windows);
        std::vector<SentenceRecord> sentences;
        for (const auto& w : cleaned)
            for (const auto& s : w.sentences) sentences.push_back(s);

        auto tag_counts = [](const std::vector<SentenceRecord>& ss) {
            std::vector<std::size_t> counts(TagVocabulary::kNumBase, 0);
            for (const auto& s : ss)
                for (const auto& t : s.tokens) {
                    int base = TagVocabulary::base_of(t.tag);
                    if (base >= 0) ++counts[static_cast<std::size_t>(base)];
                }
            return counts;
        };
        const auto before = tag_counts(sentences);
        const auto oversampled = oversample_task2(sentences, table);
        const auto after = tag_counts(oversampled);

        // One sentence per window in the prepared file: the oversampled copies
        // are independent training units.
        std::vector<ContextWindow> out_windows;
        out_windows.reserve(oversampled.size());
        for (std::size_t i = 0; i < oversampled.size(); ++i) {
            ContextWindow w;
            w.window_id = static_cast<int>(i);
            w.sentences.push_back(oversampled[i]);
            out_windows.push_back(std::move(w));
        }
        write_deft_file(out_windows, out / "task2.deft");

        report += "tag\tinitial\tfinal\tfactor\n";
        for (int base = 0; base < TagVocabulary::kNumBase; ++base) {
            char line[160];
            std::snprintf(line, sizeof(line), "%s\t%zu\t%zu\t%d\n",
                          TagVocabulary::base_labels()[base].c_str(),
                          before[static_cast<std::size_t>(base)],
                          after[static_cast<std::size_t>(base)],
                          table.factor_for_base(base));
            report += line;
        }
    }

    write_file(out / "report.txt", report);
    write_file(out / kMarkerName,
               "task " + opts.task + "\nmode " + opts.mode + "\n");
    std::cout << report;
    return 0;
}

// ------------------------------------------------------------------ vocab --

struct VocabOpts {
    std::vector<std::string> inputs;
    std::string output;
    std::size_t size = 4096;
    std::string format = "deft";
};

int cmd_vocab(const VocabOpts& opts) {
    std::vector<std::string> lines;
    for (const auto& input : opts.inputs) {
        if (!fs::exists(input))
            throw IoError("cannot read '" + input + "'");
        if (opts.format == "deft") {
            for (const auto& w : clean_corpus(parse_deft_file(input)))
                for (const auto& s : w.sentences)
                    lines.push_back(s.sentence_text);
        } else if (opts.format == "text") {
            std::ifstream in(input, std::ios::binary);
            std::string line;
            while (std::getline(in, line)) {
                if (!line.empty() && line.back() == '\r') line.pop_back();
                std::size_t tab = line.rfind('\t');
                if (tab != std::string::npos) line.resize(tab);
                lines.push_back(clean_token_text(line));
            }
        } else {
            throw ConfigError("unknown format '" + opts.format + "'");
        }
    }
    SubwordVocabulary vocab = SubwordVocabulary::build(lines, opts.size);
    vocab.save(opts.output);
    std::cout << "vocabulary of " << vocab.size() << " pieces written to "
              << opts.output << "\n";
    return 0;
}

// ------------------------------------------------------------------ train --

struct TrainOpts {
    std::string task = "2";
    std::string mode = "finetune";
    std::string train_path;
    std::string dev_path;
    std::string vocab_path;
    std::string out_dir;
    std::string embeddings;
    std::string dev_embeddings;
    double lr = 2e-5;
    int epochs = 100;
    int batch_size = 16;
    std::uint64_t seed = 1;
    double lambda1 = 0.33, lambda2 = 0.33, lambda3 = 0.33;
    int d_emb = 256, d_out = 128, hidden_layers = 1;
};

TrainConfig to_train_config(const TrainOpts& o) {
    TrainConfig cfg;
    cfg.task = parse_task(o.task);
    cfg.mode = cleaning_mode_from(o.mode);
    cfg.lr = o.lr;
    cfg.epochs = o.epochs;
    cfg.batch_size = o.batch_size;
    cfg.seed = o.seed;
    cfg.lambdas = {o.lambda1, o.lambda2, o.lambda3};
    cfg.d_emb = o.d_emb;
    cfg.d_out = o.d_out;
    cfg.hidden_layers = o.hidden_layers;
    cfg.checkpoint_dir = o.out_dir;
    return cfg;
}

int cmd_train(const TrainOpts& opts) {
    const TrainConfig cfg = to_train_config(opts);
    cfg.validate();
    const SubwordVocabulary vocab = SubwordVocabulary::load(opts.vocab_path);

    ExternalEmbeddings train_ext, dev_ext;
    const ExternalEmbeddings* train_ext_p = nullptr;
    const ExternalEmbeddings* dev_ext_p = nullptr;
    if (!opts.embeddings.empty()) {
        train_ext = ExternalEmbeddings::load(opts.embeddings);
        train_ext_p = &train_ext;
        if (train_ext.d_emb != cfg.d_emb)
            throw DataError("embedding file width " +
                            std::to_string(train_ext.d_emb) +
                            " does not match --d-emb " +
                            std::to_string(cfg.d_emb));
        dev_ext_p = train_ext_p;
        if (!opts.dev_embeddings.empty()) {
            dev_ext = ExternalEmbeddings::load(opts.dev_embeddings);
            dev_ext_p = &dev_ext;
        }
    }

    TrainResult result;
    if (cfg.task == Task::Sentence) {
        const auto train_data = read_sentence_file(opts.train_path);
        const auto dev_data = read_sentence_file(opts.dev_path);
        result = train_task1(cfg, vocab, train_data, dev_data, train_ext_p,
                             dev_ext_p);
    } else {
        const auto train_data = clean_corpus(parse_deft_file(opts.train_path));
        const auto dev_data = clean_corpus(parse_deft_file(opts.dev_path));
        result = train_sequence(cfg, vocab, train_data, dev_data, train_ext_p,
                                dev_ext_p);
    }
    std::printf("best dev metric %.6f at epoch %d; checkpoint in %s\n",
                result.best_metric, result.best_epoch, opts.out_dir.c_str());
    return 0;
}

// ---------------------------------------------------------------- predict --

struct PredictOpts {
    std::string checkpoint;
    std::string vocab_path;
    std::string input;
    std::string output;
    std::string task = "2";
    std::string embeddings;
};

ModelConfig config_from_manifest(const Manifest& m, std::size_t vocab_size) {
    ModelConfig cfg;
    cfg.vocab_size = vocab_size;
    cfg.d_emb = std::stoi(m.get("d_emb"));
    cfg.d_out = std::stoi(m.get("d_out"));
    cfg.hidden = std::stoi(m.get("hidden"));
    cfg.hidden_layers = std::stoi(m.get("hidden_layers"));
    cfg.dropout = std::stof(m.get("dropout"));
    cfg.finetune = m.get("mode") == "finetune";
    cfg.external_source = m.get("embedding_source") == "external";
    return cfg;
}

void check_vocab(const Manifest& m, const SubwordVocabulary& vocab) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(vocab.content_hash()));
    if (m.get("vocab_size") != std::to_string(vocab.size()) ||
        m.get("vocab_hash") != buf)
        throw DataError("vocabulary does not match the checkpoint manifest");
}

std::vector<std::string> read_text_lines(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path.string() + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t tab = line.rfind('\t');
        if (tab != std::string::npos && tab + 2 == line.size() &&
            (line.back() == '0' || line.back() == '1'))
            line.resize(tab);  // drop a trailing label column
        lines.push_back(line);
    }
    return lines;
}

int cmd_predict(const PredictOpts& opts) {
    const Manifest manifest = load_manifest(opts.checkpoint);
    const Task task = parse_task(opts.task);
    const std::string ckpt_task = manifest.get("task");
    if (task == Task::Sentence && ckpt_task != "1")
        throw DataError("checkpoint was trained for task " + ckpt_task +
                        ", not for sentence classification");
    if (task == Task::Tokens && ckpt_task != "2" && ckpt_task != "multitask")
        throw DataError("checkpoint was trained for task " + ckpt_task +
                        ", not for token labeling");

    const SubwordVocabulary vocab = SubwordVocabulary::load(opts.vocab_path);
    check_vocab(manifest, vocab);
    ModelConfig cfg = config_from_manifest(manifest, vocab.size());

    ExternalEmbeddings ext;
    const ExternalEmbeddings* ext_p = nullptr;
    if (!opts.embeddings.empty()) {
        ext = ExternalEmbeddings::load(opts.embeddings);
        ext_p = &ext;
        if (ext.d_emb != cfg.d_emb)
            throw DataError("embedding file width " +
                            std::to_string(ext.d_emb) +
                            " does not match the checkpoint d_emb " +
                            std::to_string(cfg.d_emb));
    }

    if (task == Task::Sentence) {
        Task1Model model(cfg);
        load_checkpoint(opts.checkpoint, model.parameters());
        const CleaningMode mode = cleaning_mode_from(manifest.get("mode"));
        const auto lines = read_text_lines(opts.input);
        std::string out_text;
        for (std::size_t i = 0; i < lines.size(); ++i) {
            std::string cleaned = clean_sentence(lines[i], mode);
            std::vector<int> ids = sentence_ids(vocab, cleaned);
            const Tensor* block = nullptr;
            if (ext_p != nullptr) {
                std::vector<std::string> texts;
                texts.emplace_back(SubwordVocabulary::kSequenceStart);
                for (const auto& p : vocab.tokenize(cleaned))
                    texts.push_back(p.text);
                block = &ext_p->block(i, texts);
            }
            const bool positive =
                ClassifierHead::decide(model.predict(ids, block));
            out_text += lines[i];
            out_text += '\t';
            out_text += positive ? '1' : '0';
            out_text += '\n';
        }
        write_file(opts.output, out_text);
        return 0;
    }

    // Token labeling path: tokenize -> align -> encode -> viterbi -> resolve.
    auto windows = clean_corpus(parse_deft_file(opts.input));
    const auto encoded = encode_corpus(windows, vocab);
    const bool multitask_ckpt = ckpt_task == "multitask";

    Task2Model tag_model(cfg);
    MultitaskModel joint_model(cfg);
    if (multitask_ckpt)
        load_checkpoint(opts.checkpoint, joint_model.parameters());
    else
        load_checkpoint(opts.checkpoint, tag_model.parameters());

    std::map<std::size_t, std::vector<std::vector<int>>> window_id_cats;
    for (std::size_t i = 0; i < encoded.size(); ++i) {
        const EncodedSentence& item = encoded[i];
        const Tensor* block = nullptr;
        std::vector<std::string> texts;
        if (ext_p != nullptr) {
            for (const auto& p : item.pieces) texts.push_back(p.text);
            block = &ext_p->block(i, texts);
        }
        SentenceRecord& sentence =
            windows[item.window].sentences[item.sentence];

        std::vector<int> piece_tags;
        std::vector<int> token_ids_cats, token_rel_cats;
        if (multitask_ckpt) {
            auto pred = joint_model.predict(item, block);
            piece_tags = pred.piece_tags;
            token_ids_cats = resolve_categories(pred.piece_id_cats,
                                                item.alignment,
                                                kNumIdCategories);
            token_rel_cats = resolve_categories(pred.piece_rel_cats,
                                                item.alignment, kNumRelations);
        } else {
            piece_tags = tag_model.predict_piece_labels(item, block);
        }
        const std::vector<int> token_tags =
            resolve_labels(piece_tags, item.alignment);

        for (std::size_t t = 0; t < sentence.tokens.size(); ++t) {
            sentence.tokens[t].tag = token_tags[t];
            sentence.tokens[t].tag_id = 0;
            sentence.tokens[t].root_id = 0;
            sentence.tokens[t].relation =
                multitask_ckpt ? token_rel_cats[t] : 0;
        }
        if (multitask_ckpt) {
            auto& cats = window_id_cats[item.window];
            cats.resize(windows[item.window].sentences.size());
            cats[item.sentence] = token_ids_cats;
        }
    }
    for (auto& [w, cats] : window_id_cats) assign_tag_ids(windows[w], cats);

    write_predictions(windows, Task::Tokens, opts.output);
    return 0;
}

// --------------------------------------------------------------- evaluate --

struct EvalOpts {
    std::string gold;
    std::string pred;
    std::string task = "2";
    std::string out_dir;
};

void write_report_artifacts(const EvalReport& report, const fs::path& dir) {
    if (dir.empty()) return;
    fs::create_directories(dir);
    write_file(dir / "metrics.tsv", render_metrics_tsv(report));
    write_file(dir / "confusion.tsv", render_confusion_tsv(report, false));
    write_file(dir / "confusion_normalized.tsv",
               render_confusion_tsv(report, true));
}

int cmd_evaluate(const EvalOpts& opts) {
    const Task task = parse_task(opts.task);
    EvalReport report;
    if (task == Task::Sentence) {
        const auto gold = read_sentence_file(opts.gold);
        const auto pred = read_sentence_file(opts.pred);
        if (gold.size() != pred.size())
            throw DataError("gold has " + std::to_string(gold.size()) +
                            " sentences, predictions have " +
                            std::to_string(pred.size()));
        std::vector<bool> g, p;
        for (std::size_t i = 0; i < gold.size(); ++i) {
            g.push_back(gold[i].label);
            p.push_back(pred[i].label);
        }
        report = sentence_metrics(g, p);
    } else {
        const auto gold_tags = gold_token_tags(parse_deft_file(opts.gold));
        const auto pred_windows = parse_deft_file(opts.pred);
        const auto pred_tags = gold_token_tags(pred_windows);
        report = compute_metrics(gold_tags, pred_tags, tag_eval_labels(),
                                 TagVocabulary::labels());
    }
    std::cout << render_metrics_table(report);
    write_report_artifacts(report, opts.out_dir);
    return 0;
}

// -------------------------------------------------------------------- app --

int dispatch(const std::vector<std::string>& args) {
    CLI::App app{"definition-extraction toolkit: corpus preparation, BPE "
                 "vocabulary, CRF sequence labeling and sentence "
                 "classification"};
    app.require_subcommand(1);

    PrepareOpts prep;
    auto* prepare = app.add_subcommand(
        "prepare", "clean and balance a raw corpus directory");
    prepare->add_option("--input", prep.input, "directory of .deft files")
        ->required();
    prepare->add_option("--output", prep.output, "output directory")
        ->required();
    prepare->add_option("--task", prep.task, "1 or 2")
        ->capture_default_str();
    prepare->add_option("--mode", prep.mode, "frozen or finetune")
        ->capture_default_str();
    prepare->add_option("--factors", prep.factors,
                        "factor table file (tag = integer)");
    prepare->set_config("--config");

    VocabOpts voc;
    auto* vocab = app.add_subcommand(
        "vocab", "learn a byte-pair-encoding vocabulary");
    vocab->add_option("--input", voc.inputs, "corpus files")->required();
    vocab->add_option("--output", voc.output, "vocabulary file")->required();
    vocab->add_option("--size", voc.size, "total number of pieces")
        ->capture_default_str();
    vocab->add_option("--format", voc.format, "deft or text")
        ->capture_default_str();
    vocab->set_config("--config");

    TrainOpts tr;
    auto* train = app.add_subcommand("train", "train a model");
    train->add_option("--task", tr.task, "1, 2 or multitask")
        ->capture_default_str();
    train->add_option("--mode", tr.mode, "frozen or finetune")
        ->capture_default_str();
    train->add_option("--train", tr.train_path, "training file")->required();
    train->add_option("--dev", tr.dev_path, "development file")->required();
    train->add_option("--vocab", tr.vocab_path, "vocabulary file")->required();
    train->add_option("--out", tr.out_dir, "checkpoint directory")->required();
    train->add_option("--embeddings", tr.embeddings,
                      "external embedding file for the training corpus");
    train->add_option("--dev-embeddings", tr.dev_embeddings,
                      "external embedding file for the dev corpus");
    train->add_option("--lr", tr.lr, "learning rate")->capture_default_str();
    train->add_option("--epochs", tr.epochs, "training epochs")
        ->capture_default_str();
    train->add_option("--batch-size", tr.batch_size, "minibatch size")
        ->capture_default_str();
    train->add_option("--seed", tr.seed, "random seed")->capture_default_str();
    train->add_option("--lambda1", tr.lambda1, "tag loss weight")
        ->capture_default_str();
    train->add_option("--lambda2", tr.lambda2, "tag-id loss weight")
        ->capture_default_str();
    train->add_option("--lambda3", tr.lambda3, "relation loss weight")
        ->capture_default_str();
    train->add_option("--d-emb", tr.d_emb, "embedding width")
        ->capture_default_str();
    train->add_option("--d-out", tr.d_out, "projector output width")
        ->capture_default_str();
    train->add_option("--hidden-layers", tr.hidden_layers,
                      "projector hidden layers (1 or 2)")
        ->capture_default_str();
    train->set_config("--config");

    PredictOpts pred;
    auto* predict = app.add_subcommand("predict", "run a trained model");
    predict->add_option("--checkpoint", pred.checkpoint, "checkpoint directory")
        ->required();
    predict->add_option("--vocab", pred.vocab_path, "vocabulary file")
        ->required();
    predict->add_option("--input", pred.input, "input file")->required();
    predict->add_option("--output", pred.output, "prediction file")
        ->required();
    predict->add_option("--task", pred.task, "1 or 2")->capture_default_str();
    predict->add_option("--embeddings", pred.embeddings,
                        "external embedding file");
    predict->set_config("--config");

    EvalOpts ev;
    auto* evaluate = app.add_subcommand(
        "evaluate", "score predictions against gold labels");
    evaluate->add_option("--gold", ev.gold, "gold file")->required();
    evaluate->add_option("--pred", ev.pred, "prediction file")->required();
    evaluate->add_option("--task", ev.task, "1 or 2")->capture_default_str();
    evaluate->add_option("--out", ev.out_dir, "directory for TSV artifacts");
    evaluate->set_config("--config");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (prepare->parsed()) return cmd_prepare(prep);
    if (vocab->parsed()) return cmd_vocab(voc);
    if (train->parsed()) return cmd_train(tr);
    if (predict->parsed()) return cmd_predict(pred);
    if (evaluate->parsed()) return cmd_evaluate(ev);
    return 2;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    try {
        return dispatch(args);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

}  // namespace deft::cli
