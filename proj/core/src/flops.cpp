#include "ecgprune/flops.hpp"

#include <cmath>

#include "ecgprune/errors.hpp"
#include "ecgprune/ops.hpp"

namespace ecgprune {

namespace {

void check_eta(double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw ConfigError("sparsity must lie in [0,1], got " + std::to_string(eta));
  }
}

}  // namespace

std::int64_t flops_layer(int layer, double eta) {
  check_eta(eta);
  const double keep = 1.0 - eta;
  switch (layer) {
    case 1: return std::llround(71.0 * 50.0 * keep * 128.0 * 2.0);
    case 2: return 71 * 128;
    case 3: return 0;
    case 4: return std::llround(18.0 * 7.0 * keep * 32.0 * 2.0);
    case 5: return 18 * 32;
    case 6: return 0;
    case 7: return std::llround(1.0 * 9.0 * keep * 32.0 * 2.0);
    case 8: return 0;
    case 9: return 32 * 128 * 2;
    case 10: return 128 * 5 * 2;
    default:
      throw ConfigError("layer index must be 1..10, got " + std::to_string(layer));
  }
}

std::int64_t flops_total(double eta) {
  check_eta(eta);
  return std::llround(917440.0 * (1.0 - eta)) + 19136;
}

std::int64_t masked_count(std::int64_t n, double eta) {
  check_eta(eta);
  // eta*n can land just below an exact integer (0.6*6400); nudge before floor.
  std::int64_t count = static_cast<std::int64_t>(
      std::floor(eta * static_cast<double>(n) + 1e-9));
  if (count < 0) count = 0;
  if (count > n) count = n;
  return count;
}

namespace {

struct Extent {
  std::int64_t ch = 1;
  std::int64_t len = kBeatSamples;
};

std::int64_t layer_exact_flops(const Model& model, std::size_t idx, const Extent& in,
                               Extent& out) {
  const LayerSpec& spec = model.specs[idx];
  switch (spec.kind) {
    case LayerKind::Conv: {
      out.ch = spec.out_channels;
      out.len = conv_output_length(in.len, spec.kernel, spec.stride);
      const auto& group = model.params[idx];
      std::int64_t surviving = group.weight.numel();
      if (!group.mask.empty()) {
        surviving = 0;
        for (std::int64_t i = 0; i < group.mask.numel(); ++i) {
          if (group.mask[i] != 0.0) ++surviving;
        }
      }
      std::int64_t ops = surviving * out.len * 2;  // mul + add per use
      ops += out.ch * out.len;                     // bias additions
      if (spec.fused_relu) ops += out.ch * out.len;
      return ops;
    }
    case LayerKind::Activation:
      out = in;
      return in.ch * in.len;
    case LayerKind::Pool:
      out.ch = in.ch;
      out.len = conv_output_length(in.len, spec.kernel, spec.stride);
      return 0;
    case LayerKind::Flatten:
      out.ch = 1;
      out.len = in.ch * in.len;
      return 0;
    case LayerKind::Dense: {
      out.ch = 1;
      out.len = spec.out_channels;
      std::int64_t ops = spec.in_channels * spec.out_channels * 2;
      ops += spec.out_channels;
      if (spec.fused_relu) ops += spec.out_channels;
      return ops;
    }
  }
  return 0;
}

}  // namespace

std::int64_t exact_flops_layer(const Model& model, int layer) {
  if (layer < 1 || layer > static_cast<int>(model.specs.size())) {
    throw ConfigError("layer index out of range");
  }
  Extent cur;
  std::int64_t ops = 0;
  for (std::size_t i = 0; i < static_cast<std::size_t>(layer); ++i) {
    Extent next;
    ops = layer_exact_flops(model, i, cur, next);
    cur = next;
  }
  return ops;
}

std::int64_t exact_flops_total(const Model& model) {
  Extent cur;
  std::int64_t total = 0;
  for (std::size_t i = 0; i < model.specs.size(); ++i) {
    Extent next;
    total += layer_exact_flops(model, i, cur, next);
    cur = next;
  }
  return total;
}

}  // namespace ecgprune
