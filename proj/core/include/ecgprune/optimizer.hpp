#pragma once

#include <cstdint>
#include <vector>

#include "ecgprune/tensor.hpp"

namespace ecgprune {

enum class OptimizerRule { Sgd, Adam };

struct OptimizerConfig {
  OptimizerRule rule = OptimizerRule::Adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Mask-aware parameter updater. One instance owns the moment accumulators for
// a fixed set of parameter tensors (slots) plus a shared step counter; call
// advance() once per optimization step, then apply() per tensor.
//
// Positions where mask is 0, and whole tensors with trainable == false, are
// left bit-identical: neither the parameter nor its accumulators are touched.
class Optimizer {
 public:
  Optimizer(OptimizerConfig cfg, std::size_t slot_count);

  void advance() { ++step_; }

  void apply(std::size_t slot, Tensor& param, const Tensor& grad, const Tensor* mask,
             bool trainable);

  std::uint64_t step_count() const { return step_; }
  const OptimizerConfig& config() const { return cfg_; }

 private:
  struct Moments {
    Tensor m, v;
  };
  OptimizerConfig cfg_;
  std::vector<Moments> moments_;
  std::uint64_t step_ = 0;
};

}  // namespace ecgprune
