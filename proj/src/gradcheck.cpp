#include "devseq/gradcheck.hpp"

#include <cmath>
#include <stdexcept>

namespace devseq {

GradCheckReport grad_check(const LossBuilder& build_loss,
                           const std::vector<Parameter*>& params, double eps) {
  if (eps <= 0) throw std::runtime_error("grad_check: eps must be positive");

  for (Parameter* p : params) p->zero_grad();
  std::vector<std::vector<double>> analytic;
  {
    Graph g;
    Tensor loss = build_loss(g);
    g.backward(loss);
  }
  analytic.reserve(params.size());
  for (Parameter* p : params) analytic.push_back(p->grad);

  auto eval = [&]() {
    Graph g;
    return build_loss(g).scalar();
  };

  GradCheckReport report;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter& p = *params[pi];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double saved = p.value[i];
      p.value[i] = saved + eps;
      const double f_plus = eval();
      p.value[i] = saved - eps;
      const double f_minus = eval();
      p.value[i] = saved;

      const double numeric = (f_plus - f_minus) / (2.0 * eps);
      const double a = analytic[pi][i];
      const double rel = std::abs(a - numeric) /
                         std::max(1e-8, std::abs(a) + std::abs(numeric));
      if (rel >= report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst_param = p.name;
        report.worst_index = i;
        report.analytic = a;
        report.numeric = numeric;
      }
    }
    p.zero_grad();
  }
  return report;
}

}  // namespace devseq
