#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "devseq/corpus.hpp"
#include "devseq/eval.hpp"
#include "devseq/model.hpp"

namespace devseq {

// Which corpus column the model learns to predict. Pos turns the same
// machinery into a POS tagger (dev metric becomes token accuracy).
enum class LabelSource { Entity, Pos };

struct TrainConfig {
  ModelConfig model;  // tag_set is filled in by train() from the corpora
  double lr = 1e-3;
  double weight_decay = 1e-6;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int batch_size = 1;  // fixed; larger batches are out of scope
  int max_epochs = 100;
  int patience = 10;
  std::uint64_t seed = 42;  // umbrella seed; sub-streams are derived from it
  std::string embeddings_path;  // empty -> random word vectors
  double random_emb_low = -0.25;
  double random_emb_high = 0.25;
  std::size_t min_count = 1;
  LabelSource label_source = LabelSource::Entity;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0;
  double dev_loss = 0;
  double dev_f1 = 0;  // token accuracy (in percent) for LabelSource::Pos
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  int stopped_epoch = 0;

  // key=value lines, one per epoch, plus a summary line; byte-stable.
  std::string to_text() const;
};

// Test seam: lets a run substitute the early-stopping signal.
struct TrainHooks {
  std::function<double(int epoch, double real_dev_loss)> dev_loss_override;
};

struct TrainResult {
  SequenceLabeler model;  // parameters of best_epoch, not the last epoch
  TrainHistory history;
};

// Entity tags implied by the corpus scheme and entity types: "O" first, then
// per sorted type B-T (IOB only) and I-T.
std::vector<std::string> derive_tag_set(const Corpus& corpus);

// Sentence-level training (one Adam step per sentence), per-epoch shuffling,
// dev-loss model selection with patience-based early stopping.
TrainResult train(const TrainConfig& config, const Corpus& train_corpus,
                  const Corpus& dev_corpus, const TrainHooks* hooks = nullptr,
                  std::ostream* log = nullptr);

std::vector<std::vector<std::string>> predict_corpus(SequenceLabeler& model,
                                                     const Corpus& corpus);

// Prediction + entity-level scoring; rejects tag-set mismatches.
ScoreReport evaluate(SequenceLabeler& model, const Corpus& corpus);

struct SweepRow {
  double rate = 0;
  double best_dev_f1 = 0;
};

// Trains once per distinct rate with shared seeds; duplicates are dropped
// with a warning on `log`.
std::vector<SweepRow> dropout_sweep(const TrainConfig& config,
                                    const std::vector<double>& rates,
                                    const Corpus& train_corpus,
                                    const Corpus& dev_corpus,
                                    std::ostream* log = nullptr);
std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace devseq
