#include "ecgprune/optimizer.hpp"

#include <cmath>

#include "ecgprune/errors.hpp"

namespace ecgprune {

Optimizer::Optimizer(OptimizerConfig cfg, std::size_t slot_count)
    : cfg_(cfg), moments_(slot_count) {}

void Optimizer::apply(std::size_t slot, Tensor& param, const Tensor& grad, const Tensor* mask,
                      bool trainable) {
  if (!trainable) return;
  if (!param.same_shape(grad)) {
    throw ShapeError("optimizer: grad " + shape_string(grad) + " vs param " +
                     shape_string(param));
  }
  if (mask && !mask->same_shape(param)) {
    throw ShapeError("optimizer: mask " + shape_string(*mask) + " vs param " +
                     shape_string(param));
  }
  const std::int64_t n = param.numel();
  const double* g = grad.data();
  const double* mk = mask ? mask->data() : nullptr;
  double* p = param.data();

  if (cfg_.rule == OptimizerRule::Sgd) {
    const double lr = cfg_.learning_rate;
    for (std::int64_t i = 0; i < n; ++i) {
      if (mk && mk[i] == 0.0) continue;
      p[i] -= lr * g[i];
    }
    return;
  }

  // Adam with bias correction; step_ must have been advanced to >= 1.
  if (step_ == 0) throw ConfigError("optimizer: apply() before advance()");
  Moments& mo = moments_[slot];
  if (mo.m.empty()) {
    mo.m = Tensor::zeros(param.shape());
    mo.v = Tensor::zeros(param.shape());
  }
  double* m = mo.m.data();
  double* v = mo.v.data();
  const double b1 = cfg_.beta1, b2 = cfg_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  const double lr = cfg_.learning_rate;
  for (std::int64_t i = 0; i < n; ++i) {
    if (mk && mk[i] == 0.0) continue;
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
    const double mhat = m[i] / c1;
    const double vhat = v[i] / c2;
    p[i] -= lr * mhat / (std::sqrt(vhat) + cfg_.epsilon);
  }
}

}  // namespace ecgprune
