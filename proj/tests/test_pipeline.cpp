#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "devseq/checkpoint.hpp"
#include "devseq/pipeline.hpp"
#include "test_helpers.hpp"

using namespace devseq;
using devseq::testing::data_path;

namespace {

Corpus toy_corpus() {
  return load_conll_file(data_path("toy_ner.conll"), TagScheme::IO);
}

TrainConfig fast_config() {
  TrainConfig cfg;
  cfg.model.word_emb_dim = 16;
  cfg.model.hidden_size = 8;
  cfg.model.subword = SubwordMode::None;
  cfg.model.dropout_rate = 0.0;
  cfg.max_epochs = 6;
  cfg.patience = 5;
  cfg.seed = 11;
  return cfg;
}

}  // namespace

TEST_CASE("derive_tag_set orders tags deterministically") {
  Corpus c = toy_corpus();
  CHECK(derive_tag_set(c) ==
        std::vector<std::string>{"O", "I-LOC", "I-ORG", "I-PER"});
  Corpus iob = parse_conll("a N B-PER\nb N I-LOC\n\n", TagScheme::IOB);
  CHECK(derive_tag_set(iob) ==
        std::vector<std::string>{"O", "B-LOC", "I-LOC", "B-PER", "I-PER"});
}

TEST_CASE("train config validation") {
  TrainConfig cfg = fast_config();
  cfg.batch_size = 2;
  CHECK_THROWS(cfg.validate());
  cfg = fast_config();
  cfg.patience = cfg.max_epochs;
  CHECK_THROWS(cfg.validate());
  cfg = fast_config();
  cfg.label_source = LabelSource::Pos;
  cfg.model.use_pos = true;
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("early stopping with a constant stubbed dev loss") {
  Corpus corpus = toy_corpus();
  TrainConfig cfg = fast_config();
  cfg.max_epochs = 50;
  cfg.patience = 3;
  TrainHooks hooks;
  hooks.dev_loss_override = [](int, double) { return 1.0; };
  TrainResult result = train(cfg, corpus, corpus, &hooks);
  CHECK(result.history.stopped_epoch == cfg.patience + 1);
  CHECK(result.history.best_epoch == 1);
  CHECK(result.history.epochs.size() == static_cast<std::size_t>(cfg.patience + 1));

  // The returned model is the epoch-1 snapshot: a run with different
  // patience stops later but must return byte-identical parameters.
  TrainConfig cfg2 = cfg;
  cfg2.patience = 5;
  TrainResult longer = train(cfg2, corpus, corpus, &hooks);
  CHECK(longer.history.stopped_epoch == 6);
  CHECK(serialize_checkpoint(longer.model) == serialize_checkpoint(result.model));

  // A stub that improves until epoch 2 returns different parameters.
  TrainHooks improving;
  improving.dev_loss_override = [](int epoch, double) { return epoch <= 2 ? 2.0 - epoch : 5.0; };
  TrainResult best2 = train(cfg, corpus, corpus, &improving);
  CHECK(best2.history.best_epoch == 2);
  CHECK(serialize_checkpoint(best2.model) != serialize_checkpoint(result.model));
}

TEST_CASE("early stopping never fires before patience+1 epochs") {
  Corpus corpus = toy_corpus();
  TrainConfig cfg = fast_config();
  cfg.max_epochs = 8;
  cfg.patience = 4;
  TrainHooks hooks;
  hooks.dev_loss_override = [](int, double) { return 7.0; };
  TrainResult result = train(cfg, corpus, corpus, &hooks);
  CHECK(result.history.stopped_epoch == 5);
  CHECK(result.history.epochs.size() == 5);
}

TEST_CASE("identical seeds give byte-identical checkpoints and histories") {
  Corpus corpus = toy_corpus();
  TrainConfig cfg = fast_config();
  cfg.model.subword = SubwordMode::Grapheme;
  cfg.model.subword_emb_dim = 4;
  cfg.model.cnn_filter_widths = {2, 3};
  cfg.model.cnn_filters_per_width = 3;
  cfg.model.cnn_output_dim = 4;
  cfg.model.dropout_rate = 0.3;
  cfg.max_epochs = 3;
  cfg.patience = 2;

  TrainResult a = train(cfg, corpus, corpus);
  TrainResult b = train(cfg, corpus, corpus);
  CHECK(serialize_checkpoint(a.model) == serialize_checkpoint(b.model));
  CHECK(a.history.to_text() == b.history.to_text());

  TrainConfig other = cfg;
  other.seed = cfg.seed + 1;
  TrainResult c = train(other, corpus, corpus);
  CHECK(serialize_checkpoint(c.model) != serialize_checkpoint(a.model));
}

TEST_CASE("small overfit run reaches perfect training F1") {
  Corpus corpus = toy_corpus();
  TrainConfig cfg = fast_config();
  cfg.model.word_emb_dim = 24;
  cfg.model.hidden_size = 16;
  cfg.max_epochs = 60;
  cfg.patience = 30;
  cfg.seed = 5;
  TrainResult result = train(cfg, corpus, corpus);
  ScoreReport report = evaluate(result.model, corpus);
  CHECK(report.overall.f1() == doctest::Approx(100.0));
}

TEST_CASE("evaluate rejects tag-set mismatches") {
  Corpus corpus = toy_corpus();
  TrainConfig cfg = fast_config();
  cfg.max_epochs = 2;
  cfg.patience = 1;
  TrainResult result = train(cfg, corpus, corpus);

  Corpus other = parse_conll("x N I-MISC\n\n", TagScheme::IO);
  CHECK_THROWS_WITH_AS(evaluate(result.model, other), doctest::Contains("tag-set"),
                       std::runtime_error);
}

TEST_CASE("train rejects mismatched corpora") {
  Corpus corpus = toy_corpus();
  Corpus other_types = parse_conll("x N I-MISC\n\n", TagScheme::IO);
  TrainConfig cfg = fast_config();
  CHECK_THROWS(train(cfg, corpus, other_types));
  Corpus iob = parse_conll("x N B-PER\n\n", TagScheme::IOB);
  CHECK_THROWS(train(cfg, corpus, iob));
  CHECK_THROWS(train(cfg, corpus, Corpus{}));
}

TEST_CASE("history text is machine parseable") {
  TrainHistory h;
  h.epochs.push_back({1, 0.5, 0.25, 50.0});
  h.best_epoch = 1;
  h.stopped_epoch = 1;
  const std::string text = h.to_text();
  CHECK(text.find("epoch=1 train_loss=0.5 dev_loss=0.25 dev_f1=50\n") != std::string::npos);
  CHECK(text.find("best_epoch=1 stopped_epoch=1") != std::string::npos);
}

TEST_CASE("checkpoint round trip preserves behavior") {
  Corpus corpus = toy_corpus();
  TrainConfig cfg = fast_config();
  cfg.model.subword = SubwordMode::Character;
  cfg.model.subword_emb_dim = 4;
  cfg.model.cnn_filter_widths = {2};
  cfg.model.cnn_filters_per_width = 3;
  cfg.model.cnn_output_dim = 4;
  cfg.model.use_pos = true;
  cfg.model.use_crf = true;
  cfg.max_epochs = 2;
  cfg.patience = 1;
  TrainResult result = train(cfg, corpus, corpus);

  const std::string bytes = serialize_checkpoint(result.model, R"({"note":"test"})");
  SequenceLabeler loaded = deserialize_checkpoint(bytes);
  CHECK(loaded.config() == result.model.config());
  CHECK(loaded.word_vocab().words() == result.model.word_vocab().words());
  for (const auto& sent : corpus.sentences) {
    CHECK(loaded.predict(sent) == result.model.predict(sent));
  }
  // Serialization is stable through a round trip.
  CHECK(serialize_checkpoint(loaded, R"({"note":"test"})") == bytes);

  CHECK_THROWS(deserialize_checkpoint("garbage"));
}

TEST_CASE("dropout sweep dedups rates and reports per-rate F1") {
  Corpus corpus = toy_corpus();
  TrainConfig cfg = fast_config();
  cfg.max_epochs = 3;
  cfg.patience = 2;
  std::ostringstream log;
  const auto rows = dropout_sweep(cfg, {0.0, 0.5, 0.5}, corpus, corpus, &log);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].rate == 0.0);
  CHECK(rows[1].rate == 0.5);
  CHECK(log.str().find("duplicate") != std::string::npos);
  const std::string csv = sweep_csv(rows);
  CHECK(csv.substr(0, 8) == "rate,f1\n");

  for (const auto& row : rows) {
    CHECK(row.best_dev_f1 >= 0.0);
    CHECK(row.best_dev_f1 <= 100.0);
  }
}

TEST_CASE("pos label source trains a POS tagger on the same machinery") {
  Corpus corpus = toy_corpus();
  TrainConfig cfg = fast_config();
  cfg.label_source = LabelSource::Pos;
  cfg.max_epochs = 12;
  cfg.patience = 11;
  TrainResult result = train(cfg, corpus, corpus);
  // Tag set is the POS inventory; predictions are POS symbols.
  const auto tags = result.model.predict(corpus.sentences[0]);
  REQUIRE(tags.size() == corpus.sentences[0].tokens.size());
  for (const auto& t : tags) {
    CHECK(std::find(result.model.config().tag_set.begin(),
                    result.model.config().tag_set.end(),
                    t) != result.model.config().tag_set.end());
  }
  // dev_f1 column carries token accuracy for POS runs.
  CHECK(result.history.epochs.back().dev_f1 >= 0.0);
  CHECK(result.history.epochs.back().dev_f1 <= 100.0);
}

TEST_CASE("frozen word embeddings stay fixed through training") {
  Corpus corpus = toy_corpus();
  TrainConfig cfg = fast_config();
  cfg.model.word_emb_trainable = false;
  cfg.max_epochs = 2;
  cfg.patience = 1;
  TrainResult result = train(cfg, corpus, corpus);

  // Rebuild the same initial embedding deterministically and compare.
  const Vocabulary vocab = build_vocab(corpus, cfg.min_count);
  EmbeddingTable table = random_table(vocab.words(), cfg.model.word_emb_dim,
                                      cfg.random_emb_low, cfg.random_emb_high,
                                      derive_seed(cfg.seed, "word_emb"));
  auto params = result.model.all_parameters();
  REQUIRE(params[0]->name == "word_emb");
  for (int r = 0; r < vocab.size(); ++r) {
    const auto row = table.lookup(vocab.word(r));
    for (int i = 0; i < cfg.model.word_emb_dim; ++i) {
      CHECK(params[0]->value[static_cast<std::size_t>(r * cfg.model.word_emb_dim + i)] ==
            row[static_cast<std::size_t>(i)]);
    }
  }
  // And the trainable default does move them.
  TrainConfig trainable = fast_config();
  trainable.max_epochs = 2;
  trainable.patience = 1;
  TrainResult moved = train(trainable, corpus, corpus);
  auto moved_params = moved.model.all_parameters();
  bool any_changed = false;
  for (int r = 0; r < vocab.size() && !any_changed; ++r) {
    const auto row = table.lookup(vocab.word(r));
    for (int i = 0; i < trainable.model.word_emb_dim && !any_changed; ++i) {
      any_changed = moved_params[0]->value[static_cast<std::size_t>(
                        r * trainable.model.word_emb_dim + i)] != row[static_cast<std::size_t>(i)];
    }
  }
  CHECK(any_changed);
}
