#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "devseq/corpus.hpp"
#include "devseq/embedding.hpp"
#include "devseq/tensor.hpp"
#include "devseq/unicode.hpp"

namespace devseq {

enum class SubwordMode { None, Character, Grapheme };

std::string to_string(SubwordMode mode);
SubwordMode subword_mode_from_string(const std::string& name);

struct ModelConfig {
  int word_emb_dim = 300;
  bool word_emb_trainable = true;
  int hidden_size = 100;
  SubwordMode subword = SubwordMode::None;
  int subword_emb_dim = 30;
  std::vector<int> cnn_filter_widths = {3, 4, 5};
  int cnn_filters_per_width = 30;
  int cnn_output_dim = 30;
  bool use_pos = false;
  bool use_crf = false;
  double dropout_rate = 0.5;
  std::vector<std::string> tag_set;

  void validate() const;
  int feature_dim(int pos_vocab_size) const;
  int num_tags() const { return static_cast<int>(tag_set.size()); }

  bool operator==(const ModelConfig&) const = default;
};

// Subword units of a word under the configured segmentation.
std::vector<std::string> subword_units(const std::string& surface, SubwordMode mode);

// One LSTM direction's parameters as graph nodes; gate order i, f, g, o.
struct LstmNodeParams {
  Tensor w_ih;  // {4H, D}
  Tensor w_hh;  // {4H, H}
  Tensor bias;  // {4H}
  int hidden = 0;
};

struct LstmState {
  Tensor h;
  Tensor c;
};

// Standard gated update: i,f,o = sigmoid(affine), g = tanh(affine),
// c' = f*c + i*g, h' = o*tanh(c').
LstmState lstm_step(Graph& g, Tensor x, LstmState prev, const LstmNodeParams& p);

// Per-token concat of the forward and backward hidden states; both
// directions start from zero state.
std::vector<Tensor> bilstm(Graph& g, const std::vector<Tensor>& inputs,
                           const LstmNodeParams& fwd, const LstmNodeParams& bwd);

// Mean over tokens of -log softmax(emission)[gold].
Tensor softmax_nll(Graph& g, const std::vector<Tensor>& emissions,
                   const std::vector<int>& gold);

// Linear-chain CRF with explicit start/stop states: transitions is
// {K+2, K+2} with start row K and stop column K+1. Log-space forward
// algorithm; loss = log Z - score(gold path).
inline int crf_start_state(int num_tags) { return num_tags; }
inline int crf_stop_state(int num_tags) { return num_tags + 1; }

Tensor crf_log_z(Graph& g, const std::vector<Tensor>& emissions,
                 Tensor transitions, int num_tags);
Tensor crf_nll(Graph& g, const std::vector<Tensor>& emissions,
               Tensor transitions, const std::vector<int>& gold);

// Max-product decode over emission/transition values; ties resolve to the
// lowest tag index.
std::vector<int> viterbi_decode(const std::vector<std::vector<double>>& emissions,
                                const std::vector<double>& transitions,
                                int num_tags);

// Word embedding (+ subword CNN) (+ POS one-hot) -> BiLSTM -> emissions,
// decoded by per-token argmax or CRF Viterbi.
class SequenceLabeler {
 public:
  SequenceLabeler(ModelConfig config, Vocabulary word_vocab,
                  Vocabulary subword_vocab, std::vector<std::string> pos_vocab,
                  const EmbeddingTable& word_vectors, std::uint64_t init_seed);

  const ModelConfig& config() const { return cfg_; }
  const Vocabulary& word_vocab() const { return word_vocab_; }
  const Vocabulary& subword_vocab() const { return subword_vocab_; }
  const std::vector<std::string>& pos_vocab() const { return pos_vocab_; }

  int tag_index(const std::string& tag) const;

  // Trainable parameters in fixed registration order (excludes the word
  // embedding matrix when it is frozen).
  std::vector<Parameter*> parameters();
  // Every parameter, frozen or not, for serialization.
  std::vector<Parameter*> all_parameters();
  std::vector<const Parameter*> all_parameters() const;

  // Per-token feature vectors in the fixed order word, subword, POS.
  std::vector<Tensor> assemble_features(Graph& g, const Sentence& sent,
                                        bool train_mode, RngStream* rng);
  // BiLSTM over features, dropout after the LSTM in train mode, affine to
  // |tag_set| scores per token.
  std::vector<Tensor> emissions(Graph& g, const Sentence& sent, bool train_mode,
                                RngStream* rng);
  // Subword CNN embedding of one word's unit-id sequence.
  Tensor cnn_subword_embed(Graph& g, Tensor subword_emb_node,
                           const std::vector<int>& unit_ids, bool train_mode,
                           RngStream* rng);

  Tensor sentence_loss(Graph& g, const Sentence& sent, bool train_mode,
                       RngStream* rng);
  std::vector<std::string> predict(const Sentence& sent);

  // Gold tag indices of a sentence under this model's tag set.
  std::vector<int> gold_tags(const Sentence& sent) const;

 private:
  friend class Checkpoint;

  ModelConfig cfg_;
  Vocabulary word_vocab_;
  Vocabulary subword_vocab_;
  std::vector<std::string> pos_vocab_;
  std::unordered_map<std::string, int> tag_index_;

  Parameter word_emb_;
  Parameter subword_emb_;
  std::vector<Parameter> conv_w_;  // one bank per filter width
  std::vector<Parameter> conv_b_;
  Parameter cnn_linear_w_;
  Parameter cnn_linear_b_;
  Parameter fwd_w_ih_, fwd_w_hh_, fwd_bias_;
  Parameter bwd_w_ih_, bwd_w_hh_, bwd_bias_;
  Parameter proj_w_, proj_b_;
  Parameter crf_transitions_;  // unused unless use_crf
};

}  // namespace devseq
