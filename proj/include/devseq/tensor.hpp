#pragma once

#include <functional>
#include <string>
#include <vector>

#include "devseq/rng.hpp"

namespace devseq {

using Shape = std::vector<int>;

std::size_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);

// Persistent learnable tensor. Lives outside any graph; graphs reference it
// through leaf nodes and backward() accumulates into grad.
struct Parameter {
  std::string name;
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool seen_backward = false;

  Parameter() = default;
  Parameter(std::string name_, Shape shape_);

  std::size_t size() const { return value.size(); }
  void zero_grad();
};

enum class Role { Parameter, Input, Intermediate };

class Graph;

// Lightweight handle to a node owned by a Graph.
struct Tensor {
  Graph* graph = nullptr;
  int node = -1;

  const Shape& shape() const;
  const std::vector<double>& value() const;
  const std::vector<double>& grad() const;
  double scalar() const;
};

// Dynamic reverse-mode tape. Built per sentence, discarded after the step;
// forward values are computed eagerly as ops are recorded.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Tensor input(Shape shape, std::vector<double> values);
  Tensor constant(Shape shape, std::vector<double> values);
  Tensor zeros(Shape shape);
  Tensor param(Parameter& p);

  Tensor add(Tensor a, Tensor b);
  Tensor sub(Tensor a, Tensor b);
  Tensor mul(Tensor a, Tensor b);
  Tensor scale(Tensor a, double c);
  Tensor matmul(Tensor a, Tensor b);  // {m,n}x{n}->{m} or {m,n}x{n,p}->{m,p}
  Tensor concat(const std::vector<Tensor>& parts, int axis = 0);
  Tensor tanh(Tensor a);
  Tensor sigmoid(Tensor a);
  Tensor relu(Tensor a);
  Tensor softmax(Tensor a, int axis = 0);
  Tensor log_sum_exp(Tensor a, int axis = 0);  // rank-1 -> {1}, max-shifted
  Tensor max_over_time(const std::vector<Tensor>& steps);  // elementwise max
  Tensor row_select(Tensor matrix, int row);
  Tensor col_select(Tensor matrix, int col);
  Tensor slice(Tensor vec, int start, int len);
  Tensor pick(Tensor vec, int index);          // {n} -> {1}
  Tensor pick2(Tensor matrix, int r, int c);   // {m,n} -> {1}
  Tensor sum(Tensor a);                        // all elements -> {1}
  Tensor mean_of(const std::vector<Tensor>& scalars);

  // Inverted dropout: train mode zeroes components with probability `rate`
  // and scales survivors by 1/(1-rate); eval mode is the identity.
  Tensor dropout(Tensor a, double rate, bool train_mode, RngStream* rng);

  // Populates gradients of everything `loss` (a one-element tensor) reaches.
  // Parameter grads accumulate across calls; node grads are recomputed.
  void backward(Tensor loss);

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;
    Role role = Role::Intermediate;
    Parameter* param = nullptr;
    std::function<void(Graph&)> backprop;
  };

  friend struct Tensor;

  Node& at(int i) { return nodes_[static_cast<std::size_t>(i)]; }
  const Node& at(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  Tensor make_node(Shape shape, Role role = Role::Intermediate);
  static void require(bool cond, const std::string& what);

  std::vector<Node> nodes_;
};

}  // namespace devseq
