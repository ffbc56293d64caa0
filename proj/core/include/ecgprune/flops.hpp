#pragma once

#include <cstdint>

#include "ecgprune/model.hpp"

namespace ecgprune {

constexpr int kBaselineLayerCount = 10;

// Per-layer FLOPs of the baseline at sparsity eta, following the published
// accounting row by row (layer is 1-based):
//   1: 71*50*(1-eta)*128*2     2: 71*128    3: 0
//   4: 18*7*(1-eta)*32*2       5: 18*32     6: 0
//   7: 1*9*(1-eta)*32*2        8: 0
//   9: 32*128*2               10: 128*5*2
// Layers 4 and 7 omit their input-channel factor; that is intentional, it is
// what the published table states. Fractional eta products round to nearest.
std::int64_t flops_layer(int layer, double eta);

// 917440*(1-eta) + 19136.
std::int64_t flops_total(double eta);

// Count of weights the mask keeps at floor(eta * N) zeros for layer size N.
// Guards against 0.6*6400 evaluating just below the exact integer.
std::int64_t masked_count(std::int64_t n, double eta);

// Realized-architecture accounting: multiply-accumulates with the true
// input-channel factors, counting only weights whose mask bit survives, plus
// bias additions and every ReLU (including the fused ones). Pool, flatten
// and softmax contribute nothing.
std::int64_t exact_flops_layer(const Model& model, int layer);
std::int64_t exact_flops_total(const Model& model);

}  // namespace ecgprune
