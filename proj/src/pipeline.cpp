#include "devseq/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "devseq/optim.hpp"
#include "devseq/rng.hpp"

namespace devseq {

void TrainConfig::validate() const {
  if (batch_size != 1) throw std::runtime_error("batch_size is fixed at 1");
  if (max_epochs < 1) throw std::runtime_error("max_epochs must be >= 1");
  if (patience < 1) throw std::runtime_error("patience must be >= 1");
  if (patience >= max_epochs) {
    throw std::runtime_error("patience must be smaller than max_epochs");
  }
  if (lr <= 0) throw std::runtime_error("learning rate must be positive");
  if (weight_decay < 0) throw std::runtime_error("weight_decay must be >= 0");
  if (label_source == LabelSource::Pos && model.use_pos) {
    throw std::runtime_error("use_pos cannot feed gold POS back in when predicting POS");
  }
}

std::vector<std::string> derive_tag_set(const Corpus& corpus) {
  std::vector<std::string> tags{"O"};
  for (const std::string& type : corpus.entity_types) {
    if (corpus.scheme == TagScheme::IOB) tags.push_back("B-" + type);
    tags.push_back("I-" + type);
  }
  return tags;
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> pos_label_set(const Corpus& train_corpus,
                                       const Corpus& dev_corpus) {
  std::set<std::string> labels;
  for (const Corpus* c : {&train_corpus, &dev_corpus}) {
    for (const auto& sent : c->sentences) {
      for (const auto& tok : sent.tokens) labels.insert(tok.pos);
    }
  }
  return {labels.begin(), labels.end()};
}

// POS vocabulary for the feature pathway: train order first, unseen dev
// symbols appended, so splits of one corpus share indices exactly.
std::vector<std::string> merged_pos_vocab(const Corpus& train_corpus,
                                          const Corpus& dev_corpus) {
  std::vector<std::string> merged = train_corpus.pos_vocab;
  std::set<std::string> seen(merged.begin(), merged.end());
  for (const auto& p : dev_corpus.pos_vocab) {
    if (seen.insert(p).second) merged.push_back(p);
  }
  return merged;
}

Vocabulary build_subword_vocab(const Corpus& corpus, SubwordMode mode) {
  Vocabulary vocab;
  if (mode == SubwordMode::None) return vocab;
  for (const auto& sent : corpus.sentences) {
    for (const auto& tok : sent.tokens) {
      for (const auto& unit : subword_units(tok.surface, mode)) vocab.add(unit);
    }
  }
  return vocab;
}

// Sentence with the POS column copied into the entity column, used when the
// model predicts POS tags.
Sentence relabel_pos(const Sentence& sent) {
  Sentence out = sent;
  for (auto& tok : out.tokens) tok.entity = tok.pos;
  return out;
}

}  // namespace

std::string TrainHistory::to_text() const {
  std::string out;
  for (const auto& rec : epochs) {
    out += "epoch=" + std::to_string(rec.epoch);
    out += " train_loss=" + fmt_double(rec.train_loss);
    out += " dev_loss=" + fmt_double(rec.dev_loss);
    out += " dev_f1=" + fmt_double(rec.dev_f1);
    out += "\n";
  }
  out += "best_epoch=" + std::to_string(best_epoch);
  out += " stopped_epoch=" + std::to_string(stopped_epoch);
  out += "\n";
  return out;
}

TrainResult train(const TrainConfig& config, const Corpus& train_corpus,
                  const Corpus& dev_corpus, const TrainHooks* hooks,
                  std::ostream* log) {
  config.validate();
  if (train_corpus.sentences.empty()) throw std::runtime_error("training corpus is empty");
  if (dev_corpus.sentences.empty()) throw std::runtime_error("development corpus is empty");
  if (train_corpus.scheme != dev_corpus.scheme) {
    throw std::runtime_error("train/dev tagging schemes differ");
  }
  if (config.label_source == LabelSource::Entity &&
      train_corpus.entity_types != dev_corpus.entity_types) {
    throw std::runtime_error("train/dev entity type sets differ (tag-set mismatch)");
  }

  ModelConfig model_cfg = config.model;
  model_cfg.tag_set = config.label_source == LabelSource::Entity
                          ? derive_tag_set(train_corpus)
                          : pos_label_set(train_corpus, dev_corpus);

  const Vocabulary word_vocab = build_vocab(train_corpus, config.min_count);
  const Vocabulary subword_vocab = build_subword_vocab(train_corpus, model_cfg.subword);
  const std::vector<std::string> pos_vocab = merged_pos_vocab(train_corpus, dev_corpus);

  std::optional<EmbeddingTable> table;
  if (config.embeddings_path.empty()) {
    if (model_cfg.word_emb_dim <= 0) {
      throw std::runtime_error("word_emb_dim must be set for random embeddings");
    }
    table.emplace(random_table(word_vocab.words(), model_cfg.word_emb_dim,
                               config.random_emb_low, config.random_emb_high,
                               derive_seed(config.seed, "word_emb")));
  } else {
    table.emplace(load_embeddings_file(config.embeddings_path,
                                       model_cfg.word_emb_dim > 0 ? model_cfg.word_emb_dim : 0,
                                       OovPolicy::RandomPerWord,
                                       derive_seed(config.seed, "oov"),
                                       model_cfg.word_emb_trainable));
    model_cfg.word_emb_dim = table->dim();
    if (log != nullptr && table->duplicate_count() > 0) {
      (*log) << "warning: " << table->duplicate_count()
             << " duplicate embedding entries ignored (first kept)\n";
    }
  }
  table->set_trainable(model_cfg.word_emb_trainable);

  SequenceLabeler model(model_cfg, word_vocab, subword_vocab, pos_vocab, *table,
                        derive_seed(config.seed, "init"));

  AdamState adam({config.lr, config.adam_beta1, config.adam_beta2, config.adam_eps,
                  config.weight_decay});
  adam.attach(model.parameters());

  RngStream shuffle_rng(derive_seed(config.seed, "shuffle"));
  RngStream dropout_rng(derive_seed(config.seed, "dropout"));

  const bool pos_labels = config.label_source == LabelSource::Pos;
  auto labeled = [&](const Sentence& sent) {
    return pos_labels ? relabel_pos(sent) : sent;
  };

  std::vector<std::vector<double>> best_values;
  auto snapshot = [&] {
    best_values.clear();
    for (Parameter* p : model.all_parameters()) best_values.push_back(p->value);
  };
  auto restore = [&] {
    auto params = model.all_parameters();
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = best_values[i];
  };

  if (log != nullptr) {
    (*log) << "config lr=" << fmt_double(config.lr)
           << " weight_decay=" << fmt_double(config.weight_decay)
           << " beta1=" << fmt_double(config.adam_beta1)
           << " beta2=" << fmt_double(config.adam_beta2)
           << " eps=" << fmt_double(config.adam_eps)
           << " hidden=" << model_cfg.hidden_size
           << " word_dim=" << model_cfg.word_emb_dim
           << " subword=" << to_string(model_cfg.subword)
           << " use_pos=" << model_cfg.use_pos << " use_crf=" << model_cfg.use_crf
           << " dropout=" << fmt_double(model_cfg.dropout_rate)
           << " max_epochs=" << config.max_epochs << " patience=" << config.patience
           << " seed=" << config.seed << "\n";
  }

  TrainHistory history;
  double best_loss = std::numeric_limits<double>::infinity();
  int no_improve = 0;

  std::vector<std::size_t> order(train_corpus.sentences.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double train_loss_sum = 0;
    for (std::size_t idx : order) {
      const Sentence sent = labeled(train_corpus.sentences[idx]);
      Graph g;
      Tensor loss = model.sentence_loss(g, sent, /*train_mode=*/true, &dropout_rng);
      train_loss_sum += loss.scalar();
      g.backward(loss);
      adam.step();
    }
    const double train_loss = train_loss_sum / static_cast<double>(order.size());

    double dev_loss_sum = 0;
    std::vector<std::vector<std::string>> dev_pred;
    std::vector<std::vector<std::string>> dev_gold;
    dev_pred.reserve(dev_corpus.sentences.size());
    for (const Sentence& raw : dev_corpus.sentences) {
      const Sentence sent = labeled(raw);
      Graph g;
      dev_loss_sum += model.sentence_loss(g, sent, /*train_mode=*/false, nullptr).scalar();
      dev_pred.push_back(model.predict(sent));
      std::vector<std::string> gold;
      for (const auto& tok : sent.tokens) gold.push_back(tok.entity);
      dev_gold.push_back(std::move(gold));
    }
    double dev_loss = dev_loss_sum / static_cast<double>(dev_corpus.sentences.size());
    double dev_f1 = pos_labels
                        ? 100.0 * token_accuracy(dev_gold, dev_pred)
                        : score(dev_gold, dev_pred, dev_corpus.scheme).overall.f1();

    if (hooks != nullptr && hooks->dev_loss_override) {
      dev_loss = hooks->dev_loss_override(epoch, dev_loss);
    }

    history.epochs.push_back({epoch, train_loss, dev_loss, dev_f1});
    if (log != nullptr) {
      (*log) << "epoch=" << epoch << " train_loss=" << fmt_double(train_loss)
             << " dev_loss=" << fmt_double(dev_loss)
             << " dev_f1=" << fmt_double(dev_f1) << "\n";
    }

    if (dev_loss < best_loss - 1e-12) {
      best_loss = dev_loss;
      history.best_epoch = epoch;
      no_improve = 0;
      snapshot();
    } else {
      ++no_improve;
    }
    history.stopped_epoch = epoch;
    if (no_improve >= config.patience) break;
  }

  restore();
  return TrainResult{std::move(model), std::move(history)};
}

std::vector<std::vector<std::string>> predict_corpus(SequenceLabeler& model,
                                                     const Corpus& corpus) {
  std::vector<std::vector<std::string>> out;
  out.reserve(corpus.sentences.size());
  for (const auto& sent : corpus.sentences) out.push_back(model.predict(sent));
  return out;
}

ScoreReport evaluate(SequenceLabeler& model, const Corpus& corpus) {
  for (const std::string& tag : derive_tag_set(corpus)) {
    try {
      model.tag_index(tag);
    } catch (const std::exception&) {
      throw std::runtime_error("corpus tag '" + tag +
                               "' is not in the model tag set (tag-set mismatch)");
    }
  }
  return score(corpus, predict_corpus(model, corpus));
}

std::vector<SweepRow> dropout_sweep(const TrainConfig& config,
                                    const std::vector<double>& rates,
                                    const Corpus& train_corpus,
                                    const Corpus& dev_corpus, std::ostream* log) {
  std::vector<double> unique_rates;
  for (double r : rates) {
    if (std::find(unique_rates.begin(), unique_rates.end(), r) != unique_rates.end()) {
      if (log != nullptr) (*log) << "warning: duplicate dropout rate " << r << " skipped\n";
      continue;
    }
    unique_rates.push_back(r);
  }
  std::vector<SweepRow> rows;
  rows.reserve(unique_rates.size());
  for (double rate : unique_rates) {
    TrainConfig run = config;
    run.model.dropout_rate = rate;
    TrainResult result = train(run, train_corpus, dev_corpus, nullptr, log);
    const auto& best = result.history.epochs.at(
        static_cast<std::size_t>(result.history.best_epoch - 1));
    rows.push_back({rate, best.dev_f1});
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "rate,f1\n";
  char buf[64];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%g,%.2f\n", row.rate, row.best_dev_f1);
    out += buf;
  }
  return out;
}

}  // namespace devseq
