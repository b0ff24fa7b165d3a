#include "devseq/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "devseq/optim.hpp"

namespace devseq {

std::string to_string(SubwordMode mode) {
  switch (mode) {
    case SubwordMode::None: return "none";
    case SubwordMode::Character: return "char";
    case SubwordMode::Grapheme: return "grapheme";
  }
  return "none";
}

SubwordMode subword_mode_from_string(const std::string& name) {
  if (name == "none") return SubwordMode::None;
  if (name == "char" || name == "character") return SubwordMode::Character;
  if (name == "grapheme") return SubwordMode::Grapheme;
  throw std::runtime_error("unknown subword mode '" + name +
                           "' (expected none, char or grapheme)");
}

void ModelConfig::validate() const {
  if (word_emb_dim <= 0) throw std::runtime_error("word_emb_dim must be positive");
  if (hidden_size <= 0) throw std::runtime_error("hidden_size must be positive");
  if (subword != SubwordMode::None) {
    if (subword_emb_dim <= 0) throw std::runtime_error("subword_emb_dim must be positive");
    if (cnn_output_dim <= 0) throw std::runtime_error("cnn_output_dim must be positive");
    if (cnn_filters_per_width <= 0) throw std::runtime_error("cnn_filters_per_width must be positive");
    if (cnn_filter_widths.empty()) throw std::runtime_error("cnn_filter_widths must be non-empty");
    for (int w : cnn_filter_widths) {
      if (w <= 0) throw std::runtime_error("cnn filter widths must be positive");
    }
  }
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    throw std::runtime_error("dropout_rate must be in [0, 1)");
  }
  if (tag_set.empty()) throw std::runtime_error("tag_set must be non-empty");
}

int ModelConfig::feature_dim(int pos_vocab_size) const {
  int dim = word_emb_dim;
  if (subword != SubwordMode::None) dim += cnn_output_dim;
  if (use_pos) dim += pos_vocab_size;
  return dim;
}

std::vector<std::string> subword_units(const std::string& surface, SubwordMode mode) {
  if (mode == SubwordMode::None) {
    throw std::runtime_error("subword_units called with subword mode 'none'");
  }
  return segment(surface, mode == SubwordMode::Character ? SegmentationMode::Character
                                                         : SegmentationMode::Grapheme);
}

LstmState lstm_step(Graph& g, Tensor x, LstmState prev, const LstmNodeParams& p) {
  const int h = p.hidden;
  Tensor pre = g.add(g.add(g.matmul(p.w_ih, x), g.matmul(p.w_hh, prev.h)), p.bias);
  Tensor gate_i = g.sigmoid(g.slice(pre, 0, h));
  Tensor gate_f = g.sigmoid(g.slice(pre, h, h));
  Tensor gate_g = g.tanh(g.slice(pre, 2 * h, h));
  Tensor gate_o = g.sigmoid(g.slice(pre, 3 * h, h));
  Tensor c = g.add(g.mul(gate_f, prev.c), g.mul(gate_i, gate_g));
  Tensor hh = g.mul(gate_o, g.tanh(c));
  return {hh, c};
}

std::vector<Tensor> bilstm(Graph& g, const std::vector<Tensor>& inputs,
                           const LstmNodeParams& fwd, const LstmNodeParams& bwd) {
  if (inputs.empty()) throw std::runtime_error("bilstm: empty input sequence");
  const std::size_t n = inputs.size();

  std::vector<Tensor> fwd_h(n);
  LstmState state{g.zeros({fwd.hidden}), g.zeros({fwd.hidden})};
  for (std::size_t t = 0; t < n; ++t) {
    state = lstm_step(g, inputs[t], state, fwd);
    fwd_h[t] = state.h;
  }

  std::vector<Tensor> bwd_h(n);
  state = LstmState{g.zeros({bwd.hidden}), g.zeros({bwd.hidden})};
  for (std::size_t t = n; t-- > 0;) {
    state = lstm_step(g, inputs[t], state, bwd);
    bwd_h[t] = state.h;
  }

  std::vector<Tensor> out(n);
  for (std::size_t t = 0; t < n; ++t) out[t] = g.concat({fwd_h[t], bwd_h[t]});
  return out;
}

Tensor softmax_nll(Graph& g, const std::vector<Tensor>& emissions,
                   const std::vector<int>& gold) {
  if (emissions.empty()) throw std::runtime_error("softmax_nll: empty sequence");
  if (emissions.size() != gold.size()) {
    throw std::runtime_error("softmax_nll: emissions/gold length mismatch");
  }
  std::vector<Tensor> token_losses;
  token_losses.reserve(emissions.size());
  for (std::size_t t = 0; t < emissions.size(); ++t) {
    token_losses.push_back(
        g.sub(g.log_sum_exp(emissions[t]), g.pick(emissions[t], gold[t])));
  }
  return g.mean_of(token_losses);
}

Tensor crf_log_z(Graph& g, const std::vector<Tensor>& emissions,
                 Tensor transitions, int num_tags) {
  if (emissions.empty()) throw std::runtime_error("crf: empty sequence");
  const int start = crf_start_state(num_tags);
  const int stop = crf_stop_state(num_tags);

  Tensor alpha = g.add(emissions[0],
                       g.slice(g.row_select(transitions, start), 0, num_tags));
  for (std::size_t t = 1; t < emissions.size(); ++t) {
    std::vector<Tensor> next(static_cast<std::size_t>(num_tags));
    for (int j = 0; j < num_tags; ++j) {
      Tensor scores = g.add(alpha, g.slice(g.col_select(transitions, j), 0, num_tags));
      next[static_cast<std::size_t>(j)] = g.log_sum_exp(scores);
    }
    alpha = g.add(g.concat(next), emissions[t]);
  }
  Tensor final_scores = g.add(alpha, g.slice(g.col_select(transitions, stop), 0, num_tags));
  return g.log_sum_exp(final_scores);
}

Tensor crf_nll(Graph& g, const std::vector<Tensor>& emissions,
               Tensor transitions, const std::vector<int>& gold) {
  if (emissions.empty()) throw std::runtime_error("crf: empty sequence");
  if (emissions.size() != gold.size()) {
    throw std::runtime_error("crf_nll: emissions/gold length mismatch");
  }
  const int num_tags = emissions[0].shape()[0];
  const int start = crf_start_state(num_tags);
  const int stop = crf_stop_state(num_tags);

  std::vector<Tensor> parts;
  parts.reserve(2 * emissions.size() + 1);
  parts.push_back(g.pick2(transitions, start, gold[0]));
  for (std::size_t t = 0; t < emissions.size(); ++t) {
    parts.push_back(g.pick(emissions[t], gold[t]));
    if (t + 1 < emissions.size()) {
      parts.push_back(g.pick2(transitions, gold[t], gold[t + 1]));
    }
  }
  parts.push_back(g.pick2(transitions, gold.back(), stop));
  Tensor gold_score = g.sum(g.concat(parts));
  return g.sub(crf_log_z(g, emissions, transitions, num_tags), gold_score);
}

std::vector<int> viterbi_decode(const std::vector<std::vector<double>>& emissions,
                                const std::vector<double>& transitions,
                                int num_tags) {
  if (emissions.empty()) throw std::runtime_error("viterbi: empty sequence");
  const int states = num_tags + 2;
  if (transitions.size() != static_cast<std::size_t>(states * states)) {
    throw std::runtime_error("viterbi: transition matrix size mismatch");
  }
  const int start = crf_start_state(num_tags);
  const int stop = crf_stop_state(num_tags);
  const std::size_t n = emissions.size();
  auto tr = [&](int i, int j) { return transitions[static_cast<std::size_t>(i * states + j)]; };

  std::vector<std::vector<double>> delta(n, std::vector<double>(static_cast<std::size_t>(num_tags)));
  std::vector<std::vector<int>> back(n, std::vector<int>(static_cast<std::size_t>(num_tags), 0));
  for (int j = 0; j < num_tags; ++j) {
    delta[0][static_cast<std::size_t>(j)] = emissions[0][static_cast<std::size_t>(j)] + tr(start, j);
  }
  for (std::size_t t = 1; t < n; ++t) {
    for (int j = 0; j < num_tags; ++j) {
      double best = delta[t - 1][0] + tr(0, j);
      int best_i = 0;
      for (int i = 1; i < num_tags; ++i) {
        const double s = delta[t - 1][static_cast<std::size_t>(i)] + tr(i, j);
        if (s > best) {  // ties keep the lowest tag index
          best = s;
          best_i = i;
        }
      }
      delta[t][static_cast<std::size_t>(j)] = emissions[t][static_cast<std::size_t>(j)] + best;
      back[t][static_cast<std::size_t>(j)] = best_i;
    }
  }
  double best = delta[n - 1][0] + tr(0, stop);
  int best_j = 0;
  for (int j = 1; j < num_tags; ++j) {
    const double s = delta[n - 1][static_cast<std::size_t>(j)] + tr(j, stop);
    if (s > best) {
      best = s;
      best_j = j;
    }
  }
  std::vector<int> path(n);
  path[n - 1] = best_j;
  for (std::size_t t = n - 1; t > 0; --t) {
    path[t - 1] = back[t][static_cast<std::size_t>(path[t])];
  }
  return path;
}

namespace {

double fan_in_bound(int fan_in) { return std::sqrt(1.0 / static_cast<double>(fan_in)); }

}  // namespace

SequenceLabeler::SequenceLabeler(ModelConfig config, Vocabulary word_vocab,
                                 Vocabulary subword_vocab,
                                 std::vector<std::string> pos_vocab,
                                 const EmbeddingTable& word_vectors,
                                 std::uint64_t init_seed)
    : cfg_(std::move(config)),
      word_vocab_(std::move(word_vocab)),
      subword_vocab_(std::move(subword_vocab)),
      pos_vocab_(std::move(pos_vocab)) {
  cfg_.validate();
  if (word_vectors.dim() != cfg_.word_emb_dim) {
    throw std::runtime_error("embedding table dim " + std::to_string(word_vectors.dim()) +
                             " does not match word_emb_dim " + std::to_string(cfg_.word_emb_dim));
  }
  if (cfg_.use_pos && pos_vocab_.empty()) {
    throw std::runtime_error("use_pos requires a non-empty POS vocabulary");
  }
  for (std::size_t i = 0; i < cfg_.tag_set.size(); ++i) {
    tag_index_[cfg_.tag_set[i]] = static_cast<int>(i);
  }
  if (tag_index_.size() != cfg_.tag_set.size()) {
    throw std::runtime_error("tag_set contains duplicates");
  }

  RngStream rng(init_seed);
  const int h = cfg_.hidden_size;
  const int k = cfg_.num_tags();

  word_emb_ = Parameter("word_emb", {word_vocab_.size(), cfg_.word_emb_dim});
  for (int r = 0; r < word_vocab_.size(); ++r) {
    const std::vector<double> row = word_vectors.lookup(word_vocab_.word(r));
    std::copy(row.begin(), row.end(),
              word_emb_.value.begin() + static_cast<std::ptrdiff_t>(r) * cfg_.word_emb_dim);
  }

  if (cfg_.subword != SubwordMode::None) {
    subword_emb_ = Parameter("subword_emb", {subword_vocab_.size(), cfg_.subword_emb_dim});
    init_uniform(subword_emb_, 0.0, 1.0, rng);
    const int f = cfg_.cnn_filters_per_width;
    for (std::size_t wi = 0; wi < cfg_.cnn_filter_widths.size(); ++wi) {
      const int w = cfg_.cnn_filter_widths[wi];
      const int fan_in = w * cfg_.subword_emb_dim;
      conv_w_.emplace_back("cnn.conv" + std::to_string(wi) + ".w", Shape{f, fan_in});
      conv_b_.emplace_back("cnn.conv" + std::to_string(wi) + ".b", Shape{f});
      init_uniform(conv_w_.back(), -fan_in_bound(fan_in), fan_in_bound(fan_in), rng);
      init_uniform(conv_b_.back(), -fan_in_bound(fan_in), fan_in_bound(fan_in), rng);
    }
    const int concat_dim = f * static_cast<int>(cfg_.cnn_filter_widths.size());
    cnn_linear_w_ = Parameter("cnn.linear.w", {cfg_.cnn_output_dim, concat_dim});
    cnn_linear_b_ = Parameter("cnn.linear.b", {cfg_.cnn_output_dim});
    init_uniform(cnn_linear_w_, -fan_in_bound(concat_dim), fan_in_bound(concat_dim), rng);
    init_uniform(cnn_linear_b_, -fan_in_bound(concat_dim), fan_in_bound(concat_dim), rng);
  }

  const int d_in = cfg_.feature_dim(static_cast<int>(pos_vocab_.size()));
  fwd_w_ih_ = Parameter("lstm.fwd.w_ih", {4 * h, d_in});
  fwd_w_hh_ = Parameter("lstm.fwd.w_hh", {4 * h, h});
  fwd_bias_ = Parameter("lstm.fwd.bias", {4 * h});
  bwd_w_ih_ = Parameter("lstm.bwd.w_ih", {4 * h, d_in});
  bwd_w_hh_ = Parameter("lstm.bwd.w_hh", {4 * h, h});
  bwd_bias_ = Parameter("lstm.bwd.bias", {4 * h});
  for (Parameter* p : {&fwd_w_ih_, &fwd_w_hh_, &fwd_bias_, &bwd_w_ih_, &bwd_w_hh_, &bwd_bias_}) {
    init_lstm_uniform(*p, h, rng);
  }

  proj_w_ = Parameter("proj.w", {k, 2 * h});
  proj_b_ = Parameter("proj.b", {k});
  init_uniform(proj_w_, -fan_in_bound(2 * h), fan_in_bound(2 * h), rng);
  init_uniform(proj_b_, -fan_in_bound(2 * h), fan_in_bound(2 * h), rng);

  if (cfg_.use_crf) {
    // Transitions start at zero; the forward recursion shapes them.
    crf_transitions_ = Parameter("crf.transitions", {k + 2, k + 2});
  }
}

int SequenceLabeler::tag_index(const std::string& tag) const {
  auto it = tag_index_.find(tag);
  if (it == tag_index_.end()) {
    throw std::runtime_error("tag '" + tag + "' not in the model tag set");
  }
  return it->second;
}

std::vector<Parameter*> SequenceLabeler::parameters() {
  std::vector<Parameter*> out;
  if (cfg_.word_emb_trainable) out.push_back(&word_emb_);
  if (cfg_.subword != SubwordMode::None) {
    out.push_back(&subword_emb_);
    for (auto& p : conv_w_) out.push_back(&p);
    for (auto& p : conv_b_) out.push_back(&p);
    out.push_back(&cnn_linear_w_);
    out.push_back(&cnn_linear_b_);
  }
  for (Parameter* p : {&fwd_w_ih_, &fwd_w_hh_, &fwd_bias_, &bwd_w_ih_, &bwd_w_hh_, &bwd_bias_,
                       &proj_w_, &proj_b_}) {
    out.push_back(p);
  }
  if (cfg_.use_crf) out.push_back(&crf_transitions_);
  return out;
}

std::vector<Parameter*> SequenceLabeler::all_parameters() {
  std::vector<Parameter*> out;
  out.push_back(&word_emb_);
  if (cfg_.subword != SubwordMode::None) {
    out.push_back(&subword_emb_);
    for (auto& p : conv_w_) out.push_back(&p);
    for (auto& p : conv_b_) out.push_back(&p);
    out.push_back(&cnn_linear_w_);
    out.push_back(&cnn_linear_b_);
  }
  for (Parameter* p : {&fwd_w_ih_, &fwd_w_hh_, &fwd_bias_, &bwd_w_ih_, &bwd_w_hh_, &bwd_bias_,
                       &proj_w_, &proj_b_}) {
    out.push_back(p);
  }
  if (cfg_.use_crf) out.push_back(&crf_transitions_);
  return out;
}

std::vector<const Parameter*> SequenceLabeler::all_parameters() const {
  auto mutable_list = const_cast<SequenceLabeler*>(this)->all_parameters();
  return {mutable_list.begin(), mutable_list.end()};
}

Tensor SequenceLabeler::cnn_subword_embed(Graph& g, Tensor subword_emb_node,
                                          const std::vector<int>& unit_ids,
                                          bool train_mode, RngStream* rng) {
  if (unit_ids.empty()) throw std::runtime_error("cnn_subword_embed: empty unit list");
  const int n = static_cast<int>(unit_ids.size());

  std::vector<Tensor> unit_vecs;
  unit_vecs.reserve(unit_ids.size());
  for (int id : unit_ids) unit_vecs.push_back(g.row_select(subword_emb_node, id));
  Tensor pad_vec = g.row_select(subword_emb_node, Vocabulary::kPadIndex);

  std::vector<Tensor> pooled;
  pooled.reserve(cfg_.cnn_filter_widths.size());
  for (std::size_t wi = 0; wi < cfg_.cnn_filter_widths.size(); ++wi) {
    const int w = cfg_.cnn_filter_widths[wi];
    // Symmetric PAD-row padding, just enough for one window on short words.
    const int pad_total = std::max(0, w - n);
    const int pad_left = pad_total / 2;
    const int pad_right = pad_total - pad_left;
    std::vector<Tensor> seq;
    seq.reserve(static_cast<std::size_t>(n + pad_total));
    for (int i = 0; i < pad_left; ++i) seq.push_back(pad_vec);
    for (const Tensor& v : unit_vecs) seq.push_back(v);
    for (int i = 0; i < pad_right; ++i) seq.push_back(pad_vec);

    Tensor conv_w = g.param(conv_w_[wi]);
    Tensor conv_b = g.param(conv_b_[wi]);
    std::vector<Tensor> scores;
    const int windows = static_cast<int>(seq.size()) - w + 1;
    scores.reserve(static_cast<std::size_t>(windows));
    for (int t = 0; t < windows; ++t) {
      std::vector<Tensor> window(seq.begin() + t, seq.begin() + t + w);
      Tensor flat = g.concat(window);
      scores.push_back(g.relu(g.add(g.matmul(conv_w, flat), conv_b)));
    }
    pooled.push_back(g.max_over_time(scores));
  }

  Tensor features = g.concat(pooled);
  features = g.dropout(features, cfg_.dropout_rate, train_mode, rng);
  return g.add(g.matmul(g.param(cnn_linear_w_), features), g.param(cnn_linear_b_));
}

std::vector<Tensor> SequenceLabeler::assemble_features(Graph& g, const Sentence& sent,
                                                       bool train_mode, RngStream* rng) {
  if (sent.tokens.empty()) throw std::runtime_error("assemble_features: empty sentence");

  Tensor word_node = cfg_.word_emb_trainable
                         ? g.param(word_emb_)
                         : g.constant(word_emb_.shape, word_emb_.value);
  Tensor subword_node;
  if (cfg_.subword != SubwordMode::None) subword_node = g.param(subword_emb_);

  std::vector<Tensor> features;
  features.reserve(sent.tokens.size());
  for (const Token& tok : sent.tokens) {
    std::vector<Tensor> parts;
    parts.push_back(g.row_select(word_node, word_vocab_.lookup(tok.surface)));
    if (cfg_.subword != SubwordMode::None) {
      std::vector<int> unit_ids;
      for (const std::string& unit : subword_units(tok.surface, cfg_.subword)) {
        unit_ids.push_back(subword_vocab_.lookup(unit));
      }
      parts.push_back(cnn_subword_embed(g, subword_node, unit_ids, train_mode, rng));
    }
    if (cfg_.use_pos) {
      parts.push_back(g.constant({static_cast<int>(pos_vocab_.size())},
                                 pos_one_hot(tok.pos, pos_vocab_)));
    }
    features.push_back(parts.size() == 1 ? parts[0] : g.concat(parts));
  }
  return features;
}

std::vector<Tensor> SequenceLabeler::emissions(Graph& g, const Sentence& sent,
                                               bool train_mode, RngStream* rng) {
  std::vector<Tensor> features = assemble_features(g, sent, train_mode, rng);

  LstmNodeParams fwd{g.param(fwd_w_ih_), g.param(fwd_w_hh_), g.param(fwd_bias_),
                     cfg_.hidden_size};
  LstmNodeParams bwd{g.param(bwd_w_ih_), g.param(bwd_w_hh_), g.param(bwd_bias_),
                     cfg_.hidden_size};
  std::vector<Tensor> hidden = bilstm(g, features, fwd, bwd);

  Tensor proj_w = g.param(proj_w_);
  Tensor proj_b = g.param(proj_b_);
  std::vector<Tensor> out;
  out.reserve(hidden.size());
  for (Tensor h : hidden) {
    h = g.dropout(h, cfg_.dropout_rate, train_mode, rng);
    out.push_back(g.add(g.matmul(proj_w, h), proj_b));
  }
  return out;
}

std::vector<int> SequenceLabeler::gold_tags(const Sentence& sent) const {
  std::vector<int> gold;
  gold.reserve(sent.tokens.size());
  for (const Token& tok : sent.tokens) gold.push_back(tag_index(tok.entity));
  return gold;
}

Tensor SequenceLabeler::sentence_loss(Graph& g, const Sentence& sent, bool train_mode,
                                      RngStream* rng) {
  std::vector<Tensor> em = emissions(g, sent, train_mode, rng);
  const std::vector<int> gold = gold_tags(sent);
  if (cfg_.use_crf) {
    return crf_nll(g, em, g.param(crf_transitions_), gold);
  }
  return softmax_nll(g, em, gold);
}

std::vector<std::string> SequenceLabeler::predict(const Sentence& sent) {
  Graph g;
  std::vector<Tensor> em = emissions(g, sent, /*train_mode=*/false, nullptr);
  std::vector<int> path;
  if (cfg_.use_crf) {
    std::vector<std::vector<double>> values;
    values.reserve(em.size());
    for (const Tensor& e : em) values.push_back(e.value());
    path = viterbi_decode(values, crf_transitions_.value, cfg_.num_tags());
  } else {
    path.reserve(em.size());
    for (const Tensor& e : em) {
      const auto& v = e.value();
      int best = 0;
      for (std::size_t j = 1; j < v.size(); ++j) {
        if (v[j] > v[best]) best = static_cast<int>(j);  // ties keep lowest index
      }
      path.push_back(best);
    }
  }
  std::vector<std::string> tags;
  tags.reserve(path.size());
  for (int id : path) tags.push_back(cfg_.tag_set[static_cast<std::size_t>(id)]);
  return tags;
}

}  // namespace devseq
