#include <doctest.h>

#include <cmath>

#include "devseq/gradcheck.hpp"
#include "devseq/model.hpp"
#include "devseq/optim.hpp"
#include "devseq/rng.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace devseq;
using devseq::testing::brute_force_best_path;
using devseq::testing::brute_force_log_z;

namespace {

// Tiny dims keep the central-difference sweeps fast.
ModelConfig tiny_config(SubwordMode subword, bool use_pos, bool use_crf) {
  ModelConfig cfg;
  cfg.word_emb_dim = 4;
  cfg.hidden_size = 3;
  cfg.subword = subword;
  cfg.subword_emb_dim = 3;
  cfg.cnn_filter_widths = {2, 3};
  cfg.cnn_filters_per_width = 2;
  cfg.cnn_output_dim = 3;
  cfg.use_pos = use_pos;
  cfg.use_crf = use_crf;
  cfg.dropout_rate = 0.0;
  cfg.tag_set = {"O", "I-PER"};
  return cfg;
}

SequenceLabeler tiny_model(const ModelConfig& cfg, std::uint64_t seed) {
  Vocabulary words({"राम", "नेपाल", "गयो"});
  Vocabulary units;
  for (const char* w : {"राम", "नेपाल", "गयो"}) {
    if (cfg.subword != SubwordMode::None) {
      for (const auto& u : subword_units(w, cfg.subword)) units.add(u);
    }
  }
  std::vector<std::string> pos{"NNP", "VB"};
  EmbeddingTable table = random_table(words.words(), cfg.word_emb_dim, -0.5, 0.5, seed);
  return SequenceLabeler(cfg, words, units, pos, table, seed + 1);
}

Sentence three_tokens() {
  return devseq::testing::make_sentence(
      {{{"राम", "NNP", "I-PER"}}, {{"नेपाल", "NNP", "O"}}, {{"गयो", "VB", "O"}}});
}

}  // namespace

TEST_CASE("lstm_step with zero parameters matches hand evaluation") {
  Graph g;
  Parameter w_ih("w_ih", {4, 2});
  Parameter w_hh("w_hh", {4, 1});
  Parameter bias("b", {4});
  LstmNodeParams p{g.param(w_ih), g.param(w_hh), g.param(bias), 1};

  LstmState prev{g.zeros({1}), g.input({1}, {1.0})};  // c = [1]
  LstmState next = lstm_step(g, g.input({2}, {0.7, -0.3}), prev, p);
  // All-zero params: i = f = o = 0.5, g = 0 -> c' = 0.5, h' = 0.5*tanh(0.5).
  CHECK(next.c.value()[0] == doctest::Approx(0.5));
  CHECK(next.h.value()[0] == doctest::Approx(0.5 * std::tanh(0.5)).epsilon(1e-12));
  CHECK(next.h.value()[0] == doctest::Approx(0.2310585786));

  LstmState from_zero{g.zeros({1}), g.zeros({1})};
  LstmState out = lstm_step(g, g.input({2}, {2.0, -1.0}), from_zero, p);
  CHECK(out.h.value()[0] == doctest::Approx(0.0));
}

TEST_CASE("lstm_step gradient check") {
  RngStream rng(3);
  Parameter w_ih("w_ih", {8, 3});
  Parameter w_hh("w_hh", {8, 2});
  Parameter bias("b", {8});
  Parameter x("x", {3});
  for (Parameter* p : {&w_ih, &w_hh, &bias, &x}) init_lstm_uniform(*p, 2, rng);

  auto build = [&](Graph& g) {
    LstmNodeParams p{g.param(w_ih), g.param(w_hh), g.param(bias), 2};
    LstmState st{g.zeros({2}), g.zeros({2})};
    st = lstm_step(g, g.param(x), st, p);
    st = lstm_step(g, g.param(x), st, p);  // two steps share parameters
    return g.sum(st.h);
  };
  auto report = grad_check(build, {&w_ih, &w_hh, &bias, &x}, 1e-4);
  CHECK(report.max_rel_err < 1e-4);
}

TEST_CASE("bilstm output dims and direction symmetry") {
  RngStream rng(5);
  const int h = 4;
  const int d = 3;
  Parameter fw_ih("f.ih", {4 * h, d}), fw_hh("f.hh", {4 * h, h}), fb("f.b", {4 * h});
  Parameter bw_ih("b.ih", {4 * h, d}), bw_hh("b.hh", {4 * h, h}), bb("b.b", {4 * h});
  for (Parameter* p : {&fw_ih, &fw_hh, &fb, &bw_ih, &bw_hh, &bb}) {
    init_lstm_uniform(*p, h, rng);
  }
  std::vector<std::vector<double>> xs = {{1, 0, -1}, {0.5, 0.2, 0}, {-0.3, 0.9, 0.1}};

  Graph g;
  LstmNodeParams fwd{g.param(fw_ih), g.param(fw_hh), g.param(fb), h};
  LstmNodeParams bwd{g.param(bw_ih), g.param(bw_hh), g.param(bb), h};
  std::vector<Tensor> inputs;
  for (const auto& x : xs) inputs.push_back(g.input({d}, x));
  auto out = bilstm(g, inputs, fwd, bwd);
  REQUIRE(out.size() == 3);
  for (const auto& t : out) CHECK(t.shape() == Shape{2 * h});

  // Reversing the inputs and swapping direction parameters reverses the
  // outputs with halves exchanged.
  Graph g2;
  LstmNodeParams fwd2{g2.param(bw_ih), g2.param(bw_hh), g2.param(bb), h};
  LstmNodeParams bwd2{g2.param(fw_ih), g2.param(fw_hh), g2.param(fb), h};
  std::vector<Tensor> rev;
  for (auto it = xs.rbegin(); it != xs.rend(); ++it) rev.push_back(g2.input({d}, *it));
  auto out2 = bilstm(g2, rev, fwd2, bwd2);
  for (std::size_t t = 0; t < 3; ++t) {
    const auto& a = out[t].value();
    const auto& b = out2[2 - t].value();
    for (int i = 0; i < h; ++i) {
      CHECK(a[static_cast<std::size_t>(i)] ==
            doctest::Approx(b[static_cast<std::size_t>(h + i)]).epsilon(1e-12));
      CHECK(a[static_cast<std::size_t>(h + i)] ==
            doctest::Approx(b[static_cast<std::size_t>(i)]).epsilon(1e-12));
    }
  }

  Graph g3;
  CHECK_THROWS(bilstm(g3, {}, fwd, bwd));
}

TEST_CASE("length-1 sequence uses the same input for both directions") {
  ModelConfig cfg = tiny_config(SubwordMode::None, false, false);
  SequenceLabeler model = tiny_model(cfg, 21);
  Sentence sent = devseq::testing::make_sentence({{{"राम", "NNP", "O"}}});
  Graph g;
  auto em = model.emissions(g, sent, false, nullptr);
  REQUIRE(em.size() == 1);
  CHECK(em[0].shape() == Shape{2});
}

TEST_CASE("softmax_nll values") {
  Graph g;
  std::vector<Tensor> em{g.input({4}, {0, 0, 0, 0}), g.input({4}, {0, 0, 0, 0})};
  Tensor loss = softmax_nll(g, em, {1, 2});
  CHECK(loss.scalar() == doctest::Approx(std::log(4.0)));

  // Large margin at gold drives the loss to zero.
  Graph g2;
  std::vector<Tensor> em2{g2.input({3}, {50, 0, 0})};
  CHECK(softmax_nll(g2, em2, {0}).scalar() == doctest::Approx(0.0).epsilon(1e-12));

  // Matches direct per-token cross entropy.
  Graph g3;
  std::vector<double> scores{0.3, -1.2, 0.8};
  std::vector<Tensor> em3{g3.input({3}, scores)};
  double mx = *std::max_element(scores.begin(), scores.end());
  double z = 0;
  for (double s : scores) z += std::exp(s - mx);
  const double expected = -(scores[1] - mx - std::log(z));
  CHECK(softmax_nll(g3, em3, {1}).scalar() == doctest::Approx(expected));
}

TEST_CASE("crf log Z single token and hand-checked chain") {
  const int k = 2;
  std::vector<double> zero_tr(static_cast<std::size_t>((k + 2) * (k + 2)), 0.0);
  Graph g;
  std::vector<Tensor> em{g.input({2}, {0.4, -0.9})};
  Tensor tr = g.input({4, 4}, zero_tr);
  Tensor log_z = crf_log_z(g, em, tr, k);
  const double expected = std::log(std::exp(0.4) + std::exp(-0.9));
  CHECK(log_z.scalar() == doctest::Approx(expected).epsilon(1e-12));

  // Two tokens: enumerate the 4 paths by hand.
  Graph g2;
  std::vector<Tensor> em2{g2.input({2}, {1.0, 0.5}), g2.input({2}, {-0.5, 2.0})};
  std::vector<double> tr_vals(16, 0.0);
  auto set_tr = [&](int i, int j, double v) { tr_vals[static_cast<std::size_t>(i * 4 + j)] = v; };
  set_tr(0, 0, 0.3);
  set_tr(0, 1, -0.2);
  set_tr(1, 0, 0.7);
  set_tr(1, 1, 0.1);
  set_tr(2, 0, 0.05);  // start -> tag0
  set_tr(2, 1, -0.15);
  set_tr(0, 3, 0.2);  // tag0 -> stop
  set_tr(1, 3, -0.1);
  Tensor tr2 = g2.input({4, 4}, tr_vals);
  std::vector<std::vector<double>> em_vals{{1.0, 0.5}, {-0.5, 2.0}};
  const double oracle = brute_force_log_z(em_vals, tr_vals, k);
  CHECK(crf_log_z(g2, em2, tr2, k).scalar() == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("crf forward matches brute force on random instances") {
  RngStream rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    const int k = static_cast<int>(rng.next_below(4)) + 1;
    const std::size_t n = rng.next_below(5) + 1;
    std::vector<std::vector<double>> em_vals(n, std::vector<double>(static_cast<std::size_t>(k)));
    for (auto& row : em_vals) {
      for (auto& v : row) v = rng.uniform(-3, 3);
    }
    std::vector<double> tr_vals(static_cast<std::size_t>((k + 2) * (k + 2)));
    for (auto& v : tr_vals) v = rng.uniform(-2, 2);

    Graph g;
    std::vector<Tensor> em;
    for (const auto& row : em_vals) em.push_back(g.input({k}, row));
    Tensor tr = g.input({k + 2, k + 2}, tr_vals);
    const double log_z = crf_log_z(g, em, tr, k).scalar();
    CHECK(std::abs(log_z - brute_force_log_z(em_vals, tr_vals, k)) < 1e-8);

    const auto path = viterbi_decode(em_vals, tr_vals, k);
    CHECK(path == brute_force_best_path(em_vals, tr_vals, k));
  }
}

TEST_CASE("viterbi tie-breaking picks the lowest tag indices") {
  const int k = 3;
  std::vector<std::vector<double>> em(4, std::vector<double>(3, 0.0));
  std::vector<double> tr(25, 0.0);
  CHECK(viterbi_decode(em, tr, k) == std::vector<int>{0, 0, 0, 0});

  // Zero transitions reduce to per-token argmax.
  std::vector<std::vector<double>> em2{{0, 5, 1}, {2, 0, 1}};
  CHECK(viterbi_decode(em2, tr, k) == std::vector<int>{1, 0});
}

TEST_CASE("crf_nll is non-negative and vanishes for a forced path") {
  RngStream rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const int k = static_cast<int>(rng.next_below(3)) + 2;
    const std::size_t n = rng.next_below(4) + 1;
    Graph g;
    std::vector<Tensor> em;
    std::vector<int> gold;
    for (std::size_t t = 0; t < n; ++t) {
      std::vector<double> row(static_cast<std::size_t>(k));
      for (auto& v : row) v = rng.uniform(-2, 2);
      em.push_back(g.input({k}, row));
      gold.push_back(static_cast<int>(rng.next_below(static_cast<std::uint64_t>(k))));
    }
    std::vector<double> tr_vals(static_cast<std::size_t>((k + 2) * (k + 2)));
    for (auto& v : tr_vals) v = rng.uniform(-1, 1);
    Tensor tr = g.input({k + 2, k + 2}, tr_vals);
    CHECK(crf_nll(g, em, tr, gold).scalar() >= -1e-9);
  }

  // Overwhelming emissions at the gold path drive the loss to zero.
  Graph g;
  std::vector<Tensor> em{g.input({2}, {100, -100}), g.input({2}, {-100, 100})};
  Tensor tr = g.input({4, 4}, std::vector<double>(16, 0.0));
  CHECK(crf_nll(g, em, tr, {0, 1}).scalar() == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("cnn subword embedding handles one-unit words via padding") {
  ModelConfig cfg = tiny_config(SubwordMode::Character, false, false);
  cfg.cnn_filter_widths = {5};
  SequenceLabeler model = tiny_model(cfg, 13);
  // Single-character token: width-5 filters need symmetric padding.
  Sentence sent = devseq::testing::make_sentence({{{"र", "NNP", "O"}}});
  Graph g;
  auto em = model.emissions(g, sent, false, nullptr);
  REQUIRE(em.size() == 1);
  for (double v : em[0].value()) CHECK(std::isfinite(v));
}

TEST_CASE("cnn subword embedding with zeroed filters returns the linear bias") {
  ModelConfig cfg = tiny_config(SubwordMode::Grapheme, false, false);
  SequenceLabeler model = tiny_model(cfg, 64);
  std::vector<double> bias_values;
  for (Parameter* p : model.parameters()) {
    if (p->name.rfind("cnn.", 0) == 0) {
      std::fill(p->value.begin(), p->value.end(), 0.0);
    }
    if (p->name == "cnn.linear.b") bias_values = p->value;
  }
  REQUIRE(!bias_values.empty());  // all zeros after the fill above

  Graph g;
  Tensor loss = model.sentence_loss(g, three_tokens(), false, nullptr);
  (void)loss;
  // With zero filters and zero linear weights the CNN contribution per token
  // equals the (zero) bias; features remain finite and well-formed.
  auto features = model.assemble_features(g, three_tokens(), false, nullptr);
  for (const auto& f : features) {
    const auto& v = f.value();
    for (int i = 0; i < cfg.cnn_output_dim; ++i) {
      CHECK(v[static_cast<std::size_t>(cfg.word_emb_dim + i)] == 0.0);
    }
  }
}

TEST_CASE("feature dims follow the flag combination") {
  ModelConfig cfg = tiny_config(SubwordMode::Grapheme, true, false);
  CHECK(cfg.feature_dim(2) == 4 + 3 + 2);
  ModelConfig plain = tiny_config(SubwordMode::None, false, false);
  CHECK(plain.feature_dim(2) == 4);

  SequenceLabeler model = tiny_model(cfg, 55);
  Graph g;
  auto features = model.assemble_features(g, three_tokens(), false, nullptr);
  REQUIRE(features.size() == 3);
  CHECK(features[0].shape() == Shape{4 + 3 + 2});
}

TEST_CASE("emission shapes and eval determinism") {
  ModelConfig cfg = tiny_config(SubwordMode::Grapheme, true, true);
  SequenceLabeler model = tiny_model(cfg, 4242);
  Sentence sent = three_tokens();
  Graph g1;
  auto e1 = model.emissions(g1, sent, false, nullptr);
  Graph g2;
  auto e2 = model.emissions(g2, sent, false, nullptr);
  REQUIRE(e1.size() == e2.size());
  for (std::size_t t = 0; t < e1.size(); ++t) {
    CHECK(e1[t].shape() == Shape{2});
    CHECK(e1[t].value() == e2[t].value());
  }
  CHECK(model.predict(sent) == model.predict(sent));
  CHECK(model.predict(sent).size() == sent.tokens.size());
}

TEST_CASE("missing POS symbol with use_pos raises") {
  ModelConfig cfg = tiny_config(SubwordMode::None, true, false);
  SequenceLabeler model = tiny_model(cfg, 3);
  Sentence bad = devseq::testing::make_sentence({{{"राम", "XXX", "O"}}});
  Graph g;
  CHECK_THROWS(model.assemble_features(g, bad, false, nullptr));
}

TEST_CASE("single-tag model predicts that tag everywhere") {
  ModelConfig cfg = tiny_config(SubwordMode::None, false, false);
  cfg.tag_set = {"O"};
  SequenceLabeler model = tiny_model(cfg, 6);
  const auto tags = model.predict(three_tokens());
  for (const auto& t : tags) CHECK(t == "O");
}

TEST_CASE("end-to-end gradient check for every architecture combination") {
  const SubwordMode modes[] = {SubwordMode::None, SubwordMode::Character,
                               SubwordMode::Grapheme};
  Sentence sent = three_tokens();
  for (SubwordMode mode : modes) {
    for (bool use_pos : {false, true}) {
      for (bool use_crf : {false, true}) {
        CAPTURE(to_string(mode));
        CAPTURE(use_pos);
        CAPTURE(use_crf);
        ModelConfig cfg = tiny_config(mode, use_pos, use_crf);
        SequenceLabeler model = tiny_model(cfg, 1000 + static_cast<unsigned>(use_pos) * 10 +
                                                    static_cast<unsigned>(use_crf));
        auto build = [&](Graph& g) {
          return model.sentence_loss(g, sent, /*train_mode=*/false, nullptr);
        };
        auto report = grad_check(build, model.parameters(), 1e-4);
        CAPTURE(report.worst_param);
        CHECK(report.max_rel_err < 1e-4);
      }
    }
  }
}
