#include "devseq/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace devseq {

AdamState::AdamState(AdamHyper hyper) : hyper_(hyper) {}

void AdamState::attach(Parameter& p) {
  params_.push_back(&p);
  m_.emplace_back(p.size(), 0.0);
  v_.emplace_back(p.size(), 0.0);
}

void AdamState::attach(const std::vector<Parameter*>& params) {
  for (Parameter* p : params) attach(*p);
}

void AdamState::step() {
  bool any_backward = false;
  for (const Parameter* p : params_) any_backward = any_backward || p->seen_backward;
  if (!any_backward) {
    throw std::runtime_error("adam_step called before any backward pass");
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(hyper_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(hyper_.beta2, static_cast<double>(t_));
  for (std::size_t pi = 0; pi < params_.size(); ++pi) {
    Parameter& p = *params_[pi];
    auto& m = m_[pi];
    auto& v = v_[pi];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double g = p.grad[i] + hyper_.weight_decay * p.value[i];
      m[i] = hyper_.beta1 * m[i] + (1.0 - hyper_.beta1) * g;
      v[i] = hyper_.beta2 * v[i] + (1.0 - hyper_.beta2) * g * g;
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      p.value[i] -= hyper_.lr * m_hat / (std::sqrt(v_hat) + hyper_.eps);
    }
    p.zero_grad();
  }
}

void init_uniform(Parameter& p, double low, double high, RngStream& rng) {
  if (!(low < high)) throw std::runtime_error("init_uniform: require low < high");
  for (double& x : p.value) x = rng.uniform(low, high);
}

double lstm_init_bound(int hidden_size) {
  if (hidden_size <= 0) throw std::runtime_error("hidden_size must be positive");
  return std::sqrt(1.0 / static_cast<double>(hidden_size));
}

void init_lstm_uniform(Parameter& p, int hidden_size, RngStream& rng) {
  const double bound = lstm_init_bound(hidden_size);
  init_uniform(p, -bound, bound, rng);
}

}  // namespace devseq
