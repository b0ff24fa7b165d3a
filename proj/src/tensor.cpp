#include "devseq/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace devseq {

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw std::runtime_error("non-positive dimension in shape");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream out;
  out << '{';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ',';
    out << shape[i];
  }
  out << '}';
  return out.str();
}

Parameter::Parameter(std::string name_, Shape shape_)
    : name(std::move(name_)), shape(std::move(shape_)) {
  value.assign(numel(shape), 0.0);
  grad.assign(value.size(), 0.0);
}

void Parameter::zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }

const Shape& Tensor::shape() const { return graph->at(node).shape; }
const std::vector<double>& Tensor::value() const { return graph->at(node).value; }
const std::vector<double>& Tensor::grad() const { return graph->at(node).grad; }

double Tensor::scalar() const {
  const auto& v = value();
  if (v.size() != 1) {
    throw std::runtime_error("scalar() on tensor of shape " + shape_str(shape()));
  }
  return v[0];
}

void Graph::require(bool cond, const std::string& what) {
  if (!cond) throw std::runtime_error(what);
}

Tensor Graph::make_node(Shape shape, Role role) {
  Node node;
  node.shape = std::move(shape);
  node.value.assign(numel(node.shape), 0.0);
  node.grad.assign(node.value.size(), 0.0);
  node.role = role;
  nodes_.push_back(std::move(node));
  return Tensor{this, static_cast<int>(nodes_.size() - 1)};
}

Tensor Graph::input(Shape shape, std::vector<double> values) {
  require(values.size() == numel(shape), "input: values do not match shape " + shape_str(shape));
  Tensor t = make_node(std::move(shape), Role::Input);
  at(t.node).value = std::move(values);
  return t;
}

Tensor Graph::constant(Shape shape, std::vector<double> values) {
  require(values.size() == numel(shape), "constant: values do not match shape " + shape_str(shape));
  Tensor t = make_node(std::move(shape));
  at(t.node).value = std::move(values);
  return t;
}

Tensor Graph::zeros(Shape shape) {
  return make_node(std::move(shape));
}

Tensor Graph::param(Parameter& p) {
  Tensor t = make_node(p.shape, Role::Parameter);
  at(t.node).value = p.value;
  at(t.node).param = &p;
  const int self = t.node;
  at(t.node).backprop = [self](Graph& g) {
    Node& n = g.at(self);
    Parameter& param = *n.param;
    for (std::size_t i = 0; i < n.grad.size(); ++i) param.grad[i] += n.grad[i];
    param.seen_backward = true;
  };
  return t;
}

namespace {

void check_same_graph(const Tensor& a, const Tensor& b) {
  if (a.graph != b.graph) throw std::runtime_error("tensors belong to different graphs");
}

}  // namespace

Tensor Graph::add(Tensor a, Tensor b) {
  check_same_graph(a, b);
  require(at(a.node).shape == at(b.node).shape,
          "add: shape mismatch " + shape_str(at(a.node).shape) + " vs " + shape_str(at(b.node).shape));
  Tensor out = make_node(at(a.node).shape);
  Node& n = at(out.node);
  const auto& va = at(a.node).value;
  const auto& vb = at(b.node).value;
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] = va[i] + vb[i];
  const int self = out.node;
  const int ia = a.node;
  const int ib = b.node;
  n.backprop = [self, ia, ib](Graph& g) {
    const auto& go = g.at(self).grad;
    auto& ga = g.at(ia).grad;
    auto& gb = g.at(ib).grad;
    for (std::size_t i = 0; i < go.size(); ++i) {
      ga[i] += go[i];
      gb[i] += go[i];
    }
  };
  return out;
}

Tensor Graph::sub(Tensor a, Tensor b) {
  check_same_graph(a, b);
  require(at(a.node).shape == at(b.node).shape,
          "sub: shape mismatch " + shape_str(at(a.node).shape) + " vs " + shape_str(at(b.node).shape));
  Tensor out = make_node(at(a.node).shape);
  Node& n = at(out.node);
  const auto& va = at(a.node).value;
  const auto& vb = at(b.node).value;
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] = va[i] - vb[i];
  const int self = out.node;
  const int ia = a.node;
  const int ib = b.node;
  n.backprop = [self, ia, ib](Graph& g) {
    const auto& go = g.at(self).grad;
    auto& ga = g.at(ia).grad;
    auto& gb = g.at(ib).grad;
    for (std::size_t i = 0; i < go.size(); ++i) {
      ga[i] += go[i];
      gb[i] -= go[i];
    }
  };
  return out;
}

Tensor Graph::mul(Tensor a, Tensor b) {
  check_same_graph(a, b);
  require(at(a.node).shape == at(b.node).shape,
          "mul: shape mismatch " + shape_str(at(a.node).shape) + " vs " + shape_str(at(b.node).shape));
  Tensor out = make_node(at(a.node).shape);
  Node& n = at(out.node);
  const auto& va = at(a.node).value;
  const auto& vb = at(b.node).value;
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] = va[i] * vb[i];
  const int self = out.node;
  const int ia = a.node;
  const int ib = b.node;
  n.backprop = [self, ia, ib](Graph& g) {
    const auto& go = g.at(self).grad;
    const auto& va = g.at(ia).value;
    const auto& vb = g.at(ib).value;
    auto& ga = g.at(ia).grad;
    auto& gb = g.at(ib).grad;
    for (std::size_t i = 0; i < go.size(); ++i) {
      ga[i] += go[i] * vb[i];
      gb[i] += go[i] * va[i];
    }
  };
  return out;
}

Tensor Graph::scale(Tensor a, double c) {
  Tensor out = make_node(at(a.node).shape);
  Node& n = at(out.node);
  const auto& va = at(a.node).value;
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] = va[i] * c;
  const int self = out.node;
  const int ia = a.node;
  n.backprop = [self, ia, c](Graph& g) {
    const auto& go = g.at(self).grad;
    auto& ga = g.at(ia).grad;
    for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * c;
  };
  return out;
}

Tensor Graph::matmul(Tensor a, Tensor b) {
  check_same_graph(a, b);
  const Shape& sa = at(a.node).shape;
  const Shape& sb = at(b.node).shape;
  require(sa.size() == 2, "matmul: left operand must be a matrix, got " + shape_str(sa));
  const int m = sa[0];
  const int k = sa[1];
  if (sb.size() == 1) {
    require(sb[0] == k, "matmul: " + shape_str(sa) + " x " + shape_str(sb));
    Tensor out = make_node({m});
    const auto& va = at(a.node).value;
    const auto& vb = at(b.node).value;
    auto& vo = at(out.node).value;
    for (int i = 0; i < m; ++i) {
      double acc = 0;
      const double* row = va.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(k);
      for (int j = 0; j < k; ++j) acc += row[j] * vb[static_cast<std::size_t>(j)];
      vo[static_cast<std::size_t>(i)] = acc;
    }
    const int self = out.node;
    const int ia = a.node;
    const int ib = b.node;
    at(out.node).backprop = [self, ia, ib, m, k](Graph& g) {
      const auto& go = g.at(self).grad;
      const auto& va = g.at(ia).value;
      const auto& vb = g.at(ib).value;
      auto& ga = g.at(ia).grad;
      auto& gb = g.at(ib).grad;
      for (int i = 0; i < m; ++i) {
        const double gi = go[static_cast<std::size_t>(i)];
        if (gi == 0.0) continue;
        const std::size_t base = static_cast<std::size_t>(i) * static_cast<std::size_t>(k);
        for (int j = 0; j < k; ++j) {
          ga[base + static_cast<std::size_t>(j)] += gi * vb[static_cast<std::size_t>(j)];
          gb[static_cast<std::size_t>(j)] += gi * va[base + static_cast<std::size_t>(j)];
        }
      }
    };
    return out;
  }
  require(sb.size() == 2 && sb[0] == k, "matmul: " + shape_str(sa) + " x " + shape_str(sb));
  const int p = sb[1];
  Tensor out = make_node({m, p});
  const auto& va = at(a.node).value;
  const auto& vb = at(b.node).value;
  auto& vo = at(out.node).value;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < k; ++j) {
      const double aij = va[static_cast<std::size_t>(i * k + j)];
      if (aij == 0.0) continue;
      for (int c = 0; c < p; ++c) {
        vo[static_cast<std::size_t>(i * p + c)] += aij * vb[static_cast<std::size_t>(j * p + c)];
      }
    }
  }
  const int self = out.node;
  const int ia = a.node;
  const int ib = b.node;
  at(out.node).backprop = [self, ia, ib, m, k, p](Graph& g) {
    const auto& go = g.at(self).grad;
    const auto& va = g.at(ia).value;
    const auto& vb = g.at(ib).value;
    auto& ga = g.at(ia).grad;
    auto& gb = g.at(ib).grad;
    for (int i = 0; i < m; ++i) {
      for (int c = 0; c < p; ++c) {
        const double gic = go[static_cast<std::size_t>(i * p + c)];
        if (gic == 0.0) continue;
        for (int j = 0; j < k; ++j) {
          ga[static_cast<std::size_t>(i * k + j)] += gic * vb[static_cast<std::size_t>(j * p + c)];
          gb[static_cast<std::size_t>(j * p + c)] += gic * va[static_cast<std::size_t>(i * k + j)];
        }
      }
    }
  };
  return out;
}

Tensor Graph::concat(const std::vector<Tensor>& parts, int axis) {
  require(!parts.empty(), "concat: no inputs");
  require(axis == 0, "concat: only axis 0 is supported");
  int total = 0;
  for (const Tensor& t : parts) {
    require(t.graph == this, "concat: tensor from another graph");
    require(at(t.node).shape.size() == 1, "concat: rank-1 tensors only, got " +
                                              shape_str(at(t.node).shape));
    total += at(t.node).shape[0];
  }
  Tensor out = make_node({total});
  auto& vo = at(out.node).value;
  std::size_t offset = 0;
  std::vector<int> ids;
  ids.reserve(parts.size());
  for (const Tensor& t : parts) {
    const auto& v = at(t.node).value;
    std::copy(v.begin(), v.end(), vo.begin() + static_cast<std::ptrdiff_t>(offset));
    offset += v.size();
    ids.push_back(t.node);
  }
  const int self = out.node;
  at(out.node).backprop = [self, ids](Graph& g) {
    const auto& go = g.at(self).grad;
    std::size_t offset = 0;
    for (int id : ids) {
      auto& gi = g.at(id).grad;
      for (std::size_t i = 0; i < gi.size(); ++i) gi[i] += go[offset + i];
      offset += gi.size();
    }
  };
  return out;
}

Tensor Graph::tanh(Tensor a) {
  Tensor out = make_node(at(a.node).shape);
  const auto& va = at(a.node).value;
  auto& vo = at(out.node).value;
  for (std::size_t i = 0; i < vo.size(); ++i) vo[i] = std::tanh(va[i]);
  const int self = out.node;
  const int ia = a.node;
  at(out.node).backprop = [self, ia](Graph& g) {
    const auto& go = g.at(self).grad;
    const auto& vo = g.at(self).value;
    auto& ga = g.at(ia).grad;
    for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * (1.0 - vo[i] * vo[i]);
  };
  return out;
}

Tensor Graph::sigmoid(Tensor a) {
  Tensor out = make_node(at(a.node).shape);
  const auto& va = at(a.node).value;
  auto& vo = at(out.node).value;
  for (std::size_t i = 0; i < vo.size(); ++i) {
    const double x = va[i];
    vo[i] = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  }
  const int self = out.node;
  const int ia = a.node;
  at(out.node).backprop = [self, ia](Graph& g) {
    const auto& go = g.at(self).grad;
    const auto& vo = g.at(self).value;
    auto& ga = g.at(ia).grad;
    for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * vo[i] * (1.0 - vo[i]);
  };
  return out;
}

Tensor Graph::relu(Tensor a) {
  Tensor out = make_node(at(a.node).shape);
  const auto& va = at(a.node).value;
  auto& vo = at(out.node).value;
  for (std::size_t i = 0; i < vo.size(); ++i) vo[i] = va[i] > 0 ? va[i] : 0.0;
  const int self = out.node;
  const int ia = a.node;
  at(out.node).backprop = [self, ia](Graph& g) {
    const auto& go = g.at(self).grad;
    const auto& va = g.at(ia).value;
    auto& ga = g.at(ia).grad;
    for (std::size_t i = 0; i < go.size(); ++i) {
      if (va[i] > 0) ga[i] += go[i];  // derivative at 0 taken as 0
    }
  };
  return out;
}

Tensor Graph::softmax(Tensor a, int axis) {
  require(axis == 0 && at(a.node).shape.size() == 1,
          "softmax: rank-1 axis-0 only, got " + shape_str(at(a.node).shape));
  Tensor out = make_node(at(a.node).shape);
  const auto& va = at(a.node).value;
  auto& vo = at(out.node).value;
  const double mx = *std::max_element(va.begin(), va.end());
  double total = 0;
  for (std::size_t i = 0; i < vo.size(); ++i) {
    vo[i] = std::exp(va[i] - mx);
    total += vo[i];
  }
  for (double& v : vo) v /= total;
  const int self = out.node;
  const int ia = a.node;
  at(out.node).backprop = [self, ia](Graph& g) {
    const auto& go = g.at(self).grad;
    const auto& vo = g.at(self).value;
    auto& ga = g.at(ia).grad;
    double dot = 0;
    for (std::size_t i = 0; i < go.size(); ++i) dot += go[i] * vo[i];
    for (std::size_t i = 0; i < go.size(); ++i) ga[i] += vo[i] * (go[i] - dot);
  };
  return out;
}

Tensor Graph::log_sum_exp(Tensor a, int axis) {
  require(axis == 0 && at(a.node).shape.size() == 1,
          "log_sum_exp: rank-1 axis-0 only, got " + shape_str(at(a.node).shape));
  Tensor out = make_node({1});
  const auto& va = at(a.node).value;
  const double mx = *std::max_element(va.begin(), va.end());
  double total = 0;
  for (double v : va) total += std::exp(v - mx);
  at(out.node).value[0] = mx + std::log(total);
  const int self = out.node;
  const int ia = a.node;
  at(out.node).backprop = [self, ia](Graph& g) {
    const double go = g.at(self).grad[0];
    const double lse = g.at(self).value[0];
    const auto& va = g.at(ia).value;
    auto& ga = g.at(ia).grad;
    for (std::size_t i = 0; i < va.size(); ++i) ga[i] += go * std::exp(va[i] - lse);
  };
  return out;
}

Tensor Graph::max_over_time(const std::vector<Tensor>& steps) {
  require(!steps.empty(), "max_over_time: no inputs");
  const Shape shape = at(steps[0].node).shape;
  std::vector<int> ids;
  ids.reserve(steps.size());
  for (const Tensor& t : steps) {
    require(t.graph == this, "max_over_time: tensor from another graph");
    require(at(t.node).shape == shape, "max_over_time: shape mismatch");
    ids.push_back(t.node);
  }
  Tensor out = make_node(shape);
  auto& vo = at(out.node).value;
  std::vector<int> argmax(vo.size(), 0);
  for (std::size_t i = 0; i < vo.size(); ++i) {
    double best = at(ids[0]).value[i];
    int best_t = 0;
    for (std::size_t s = 1; s < ids.size(); ++s) {
      const double v = at(ids[static_cast<std::size_t>(s)]).value[i];
      if (v > best) {  // ties keep the earliest step
        best = v;
        best_t = static_cast<int>(s);
      }
    }
    vo[i] = best;
    argmax[i] = best_t;
  }
  const int self = out.node;
  at(out.node).backprop = [self, ids, argmax](Graph& g) {
    const auto& go = g.at(self).grad;
    for (std::size_t i = 0; i < go.size(); ++i) {
      g.at(ids[static_cast<std::size_t>(argmax[i])]).grad[i] += go[i];
    }
  };
  return out;
}

Tensor Graph::row_select(Tensor matrix, int row) {
  const Shape& sm = at(matrix.node).shape;
  require(sm.size() == 2, "row_select: matrix required, got " + shape_str(sm));
  require(row >= 0 && row < sm[0], "row_select: row " + std::to_string(row) +
                                       " out of range for " + shape_str(sm));
  const int cols = sm[1];
  Tensor out = make_node({cols});
  const auto& vm = at(matrix.node).value;
  auto& vo = at(out.node).value;
  const std::size_t base = static_cast<std::size_t>(row) * static_cast<std::size_t>(cols);
  std::copy(vm.begin() + static_cast<std::ptrdiff_t>(base),
            vm.begin() + static_cast<std::ptrdiff_t>(base + static_cast<std::size_t>(cols)),
            vo.begin());
  const int self = out.node;
  const int im = matrix.node;
  at(out.node).backprop = [self, im, base](Graph& g) {
    const auto& go = g.at(self).grad;
    auto& gm = g.at(im).grad;
    for (std::size_t i = 0; i < go.size(); ++i) gm[base + i] += go[i];
  };
  return out;
}

Tensor Graph::col_select(Tensor matrix, int col) {
  const Shape& sm = at(matrix.node).shape;
  require(sm.size() == 2, "col_select: matrix required, got " + shape_str(sm));
  require(col >= 0 && col < sm[1], "col_select: col " + std::to_string(col) +
                                       " out of range for " + shape_str(sm));
  const int rows = sm[0];
  const int cols = sm[1];
  Tensor out = make_node({rows});
  const auto& vm = at(matrix.node).value;
  auto& vo = at(out.node).value;
  for (int i = 0; i < rows; ++i) vo[static_cast<std::size_t>(i)] = vm[static_cast<std::size_t>(i * cols + col)];
  const int self = out.node;
  const int im = matrix.node;
  at(out.node).backprop = [self, im, rows, cols, col](Graph& g) {
    const auto& go = g.at(self).grad;
    auto& gm = g.at(im).grad;
    for (int i = 0; i < rows; ++i) gm[static_cast<std::size_t>(i * cols + col)] += go[static_cast<std::size_t>(i)];
  };
  return out;
}

Tensor Graph::slice(Tensor vec, int start, int len) {
  const Shape& sv = at(vec.node).shape;
  require(sv.size() == 1, "slice: rank-1 tensor required, got " + shape_str(sv));
  require(start >= 0 && len > 0 && start + len <= sv[0],
          "slice: [" + std::to_string(start) + "," + std::to_string(start + len) +
              ") out of range for " + shape_str(sv));
  Tensor out = make_node({len});
  const auto& vv = at(vec.node).value;
  auto& vo = at(out.node).value;
  std::copy(vv.begin() + start, vv.begin() + start + len, vo.begin());
  const int self = out.node;
  const int iv = vec.node;
  at(out.node).backprop = [self, iv, start](Graph& g) {
    const auto& go = g.at(self).grad;
    auto& gv = g.at(iv).grad;
    for (std::size_t i = 0; i < go.size(); ++i) gv[static_cast<std::size_t>(start) + i] += go[i];
  };
  return out;
}

Tensor Graph::pick(Tensor vec, int index) {
  const Shape& sv = at(vec.node).shape;
  require(sv.size() == 1, "pick: rank-1 tensor required, got " + shape_str(sv));
  require(index >= 0 && index < sv[0], "pick: index out of range");
  Tensor out = make_node({1});
  at(out.node).value[0] = at(vec.node).value[static_cast<std::size_t>(index)];
  const int self = out.node;
  const int iv = vec.node;
  at(out.node).backprop = [self, iv, index](Graph& g) {
    g.at(iv).grad[static_cast<std::size_t>(index)] += g.at(self).grad[0];
  };
  return out;
}

Tensor Graph::pick2(Tensor matrix, int r, int c) {
  const Shape& sm = at(matrix.node).shape;
  require(sm.size() == 2, "pick2: matrix required, got " + shape_str(sm));
  require(r >= 0 && r < sm[0] && c >= 0 && c < sm[1], "pick2: index out of range");
  const std::size_t flat = static_cast<std::size_t>(r) * static_cast<std::size_t>(sm[1]) +
                           static_cast<std::size_t>(c);
  Tensor out = make_node({1});
  at(out.node).value[0] = at(matrix.node).value[flat];
  const int self = out.node;
  const int im = matrix.node;
  at(out.node).backprop = [self, im, flat](Graph& g) {
    g.at(im).grad[flat] += g.at(self).grad[0];
  };
  return out;
}

Tensor Graph::sum(Tensor a) {
  Tensor out = make_node({1});
  const auto& va = at(a.node).value;
  at(out.node).value[0] = std::accumulate(va.begin(), va.end(), 0.0);
  const int self = out.node;
  const int ia = a.node;
  at(out.node).backprop = [self, ia](Graph& g) {
    const double go = g.at(self).grad[0];
    auto& ga = g.at(ia).grad;
    for (double& v : ga) v += go;
  };
  return out;
}

Tensor Graph::mean_of(const std::vector<Tensor>& scalars) {
  require(!scalars.empty(), "mean_of: no inputs");
  Tensor total = concat(scalars, 0);
  return scale(sum(total), 1.0 / static_cast<double>(scalars.size()));
}

Tensor Graph::dropout(Tensor a, double rate, bool train_mode, RngStream* rng) {
  require(rate >= 0.0 && rate < 1.0, "dropout: rate must be in [0, 1)");
  if (!train_mode || rate == 0.0) return a;
  require(rng != nullptr, "dropout: train mode requires an RngStream");
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> mask(at(a.node).value.size());
  for (double& m : mask) m = rng->next_unit() < rate ? 0.0 : keep_scale;
  Tensor out = make_node(at(a.node).shape);
  const auto& va = at(a.node).value;
  auto& vo = at(out.node).value;
  for (std::size_t i = 0; i < vo.size(); ++i) vo[i] = va[i] * mask[i];
  const int self = out.node;
  const int ia = a.node;
  at(out.node).backprop = [self, ia, mask](Graph& g) {
    const auto& go = g.at(self).grad;
    auto& ga = g.at(ia).grad;
    for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * mask[i];
  };
  return out;
}

void Graph::backward(Tensor loss) {
  require(loss.graph == this, "backward: loss from another graph");
  require(at(loss.node).value.size() == 1,
          "backward: loss must be a one-element tensor, got " + shape_str(at(loss.node).shape));
  for (Node& n : nodes_) std::fill(n.grad.begin(), n.grad.end(), 0.0);
  at(loss.node).grad[0] = 1.0;
  for (int i = loss.node; i >= 0; --i) {
    Node& n = at(i);
    if (n.backprop) n.backprop(*this);
  }
}

}  // namespace devseq
