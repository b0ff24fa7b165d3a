#pragma once

#include <cstdint>
#include <vector>

#include "devseq/rng.hpp"
#include "devseq/tensor.hpp"

namespace devseq {

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // classic L2-into-gradient coupling
};

// Adam over a fixed set of parameters. step() applies
//   g = grad + weight_decay * value
//   m = b1*m + (1-b1)*g;  v = b2*v + (1-b2)*g^2
//   value -= lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
// and zeroes the grads.
class AdamState {
 public:
  explicit AdamState(AdamHyper hyper = {});

  void attach(Parameter& p);
  void attach(const std::vector<Parameter*>& params);

  void step();

  long long step_count() const { return t_; }
  const AdamHyper& hyper() const { return hyper_; }

 private:
  AdamHyper hyper_;
  long long t_ = 0;
  std::vector<Parameter*> params_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

// Components i.i.d. uniform in [low, high).
void init_uniform(Parameter& p, double low, double high, RngStream& rng);

// LSTM-style range (-sqrt(k), sqrt(k)) with k = 1/hidden_size.
double lstm_init_bound(int hidden_size);
void init_lstm_uniform(Parameter& p, int hidden_size, RngStream& rng);

}  // namespace devseq
