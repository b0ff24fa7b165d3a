#pragma once

#include <functional>
#include <string>
#include <vector>

#include "devseq/tensor.hpp"

namespace devseq {

// Builds a fresh graph around the current parameter values and returns the
// scalar loss tensor. Must be deterministic across calls (re-seed any
// internal randomness inside the builder).
using LossBuilder = std::function<Tensor(Graph&)>;

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

// Central-difference check of backward() against (f(x+eps)-f(x-eps))/2eps per
// coordinate of every listed parameter. Relative error per coordinate is
// |a-n| / max(1e-8, |a|+|n|).
GradCheckReport grad_check(const LossBuilder& build_loss,
                           const std::vector<Parameter*>& params, double eps);

}  // namespace devseq
