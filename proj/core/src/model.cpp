#include "ecgprune/model.hpp"

#include <cmath>

#include "ecgprune/errors.hpp"
#include "ecgprune/ops.hpp"
#include "ecgprune/rng.hpp"

namespace ecgprune {

std::vector<int> Model::param_layers() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (specs[i].has_params()) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<int> Model::prunable_layers() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (specs[i].prunable) out.push_back(static_cast<int>(i));
  }
  return out;
}

void Model::enforce_masks() {
  for (auto& group : params) {
    if (group.mask.empty()) continue;
    double* w = group.weight.data();
    const double* m = group.mask.data();
    for (std::int64_t i = 0; i < group.weight.numel(); ++i) {
      if (m[i] == 0.0) w[i] = 0.0;
    }
  }
}

std::int64_t Model::mask_zero_count(int layer) const {
  const auto& mask = params[static_cast<std::size_t>(layer)].mask;
  std::int64_t zeros = 0;
  for (std::int64_t i = 0; i < mask.numel(); ++i) {
    if (mask[i] == 0.0) ++zeros;
  }
  return zeros;
}

int Model::lowest_trainable_layer() const {
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (!specs[i].has_params()) continue;
    const auto& g = params[i];
    if (g.weight_trainable || g.bias_trainable) return static_cast<int>(i);
  }
  return static_cast<int>(specs.size());
}

namespace {

LayerSpec conv_spec(std::int64_t in_ch, std::int64_t out_ch, std::int64_t k, std::int64_t stride,
                    bool fused_relu) {
  LayerSpec s;
  s.kind = LayerKind::Conv;
  s.in_channels = in_ch;
  s.out_channels = out_ch;
  s.kernel = k;
  s.stride = stride;
  s.fused_relu = fused_relu;
  s.prunable = true;
  return s;
}

LayerSpec relu_spec() {
  LayerSpec s;
  s.kind = LayerKind::Activation;
  return s;
}

LayerSpec pool_spec(std::int64_t k, std::int64_t stride) {
  LayerSpec s;
  s.kind = LayerKind::Pool;
  s.kernel = k;
  s.stride = stride;
  return s;
}

LayerSpec flatten_spec() {
  LayerSpec s;
  s.kind = LayerKind::Flatten;
  return s;
}

LayerSpec dense_spec(std::int64_t in_features, std::int64_t out_features, bool fused_relu) {
  LayerSpec s;
  s.kind = LayerKind::Dense;
  s.in_channels = in_features;
  s.out_channels = out_features;
  s.fused_relu = fused_relu;
  return s;
}

void init_group(ParamGroup& group, const LayerSpec& spec, Rng& rng) {
  std::int64_t fan_in = 0;
  if (spec.kind == LayerKind::Conv) {
    group.weight = Tensor({spec.out_channels, spec.in_channels, spec.kernel});
    fan_in = spec.in_channels * spec.kernel;
  } else {
    group.weight = Tensor({spec.out_channels, spec.in_channels});
    fan_in = spec.in_channels;
  }
  group.bias = Tensor({spec.out_channels});
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
  double* w = group.weight.data();
  for (std::int64_t i = 0; i < group.weight.numel(); ++i) {
    w[i] = rng.uniform(-limit, limit);
  }
  if (spec.prunable) group.mask = Tensor::full(group.weight.shape(), 1.0);
}

}  // namespace

Model build_baseline(std::uint64_t seed) {
  Model m;
  m.seed = seed;
  m.specs = {
      conv_spec(1, 128, 50, 3, false),  // 1: 260 -> 71
      relu_spec(),                      // 2
      pool_spec(2, 3),                  // 3: 71 -> 24
      conv_spec(128, 32, 7, 1, false),  // 4: 24 -> 18
      relu_spec(),                      // 5
      pool_spec(2, 2),                  // 6: 18 -> 9
      conv_spec(32, 32, 9, 1, true),    // 7: 9 -> 1
      flatten_spec(),                   // 8: 32x1 -> 32
      dense_spec(32, 128, true),        // 9
      dense_spec(128, 5, false),        // 10
  };

  // Geometry invariant: the conv output lengths must be exactly 71, 18, 1.
  std::int64_t len = kBeatSamples;
  const std::int64_t expected[] = {71, 18, 1};
  int conv_idx = 0;
  for (const auto& spec : m.specs) {
    if (spec.kind == LayerKind::Conv || spec.kind == LayerKind::Pool) {
      len = conv_output_length(len, spec.kernel, spec.stride);
      if (spec.kind == LayerKind::Conv) {
        if (len != expected[conv_idx]) {
          throw ShapeError("baseline conv " + std::to_string(conv_idx + 1) +
                           " output length " + std::to_string(len) + ", expected " +
                           std::to_string(expected[conv_idx]));
        }
        ++conv_idx;
      }
    }
  }

  Rng rng(mix_seed(seed, "init"));
  m.params.resize(m.specs.size());
  for (std::size_t i = 0; i < m.specs.size(); ++i) {
    if (m.specs[i].has_params()) init_group(m.params[i], m.specs[i], rng);
  }
  return m;
}

Tensor forward(const Model& model, const Tensor& beat, ForwardTrace* trace) {
  if (beat.rank() != 2 || beat.dim(0) != 1 || beat.dim(1) != kBeatSamples) {
    throw ShapeError("model input must be [1," + std::to_string(kBeatSamples) + "], got " +
                     shape_string(beat));
  }
  const std::size_t n = model.specs.size();
  if (trace) {
    trace->valid = false;
    trace->layer_inputs.assign(n, Tensor());
    trace->pool_argmax.assign(n, {});
    trace->pre_activation.assign(n, Tensor());
  }

  Tensor cur = beat;
  for (std::size_t i = 0; i < n; ++i) {
    const LayerSpec& spec = model.specs[i];
    const ParamGroup& group = model.params[i];
    if (trace) trace->layer_inputs[i] = cur;
    switch (spec.kind) {
      case LayerKind::Conv: {
        Tensor z = conv1d_forward(cur, group.weight, group.bias, spec.stride);
        if (spec.fused_relu) {
          if (trace) trace->pre_activation[i] = z;
          cur = relu_forward(z);
        } else {
          cur = std::move(z);
        }
        break;
      }
      case LayerKind::Activation:
        cur = relu_forward(cur);
        break;
      case LayerKind::Pool: {
        Pool1dResult r = maxpool1d_forward(cur, spec.kernel, spec.stride);
        if (trace) trace->pool_argmax[i] = std::move(r.argmax);
        cur = std::move(r.output);
        break;
      }
      case LayerKind::Flatten: {
        std::vector<double> data(cur.data(), cur.data() + cur.numel());
        cur = Tensor({cur.numel()}, std::move(data));
        break;
      }
      case LayerKind::Dense: {
        Tensor z = dense_forward(cur, group.weight, group.bias);
        if (spec.fused_relu) {
          if (trace) trace->pre_activation[i] = z;
          cur = relu_forward(z);
        } else {
          cur = std::move(z);
        }
        break;
      }
    }
  }
  if (trace) {
    trace->logits = cur;
    trace->valid = true;
  }
  return cur;
}

Prediction predict(const Model& model, const Tensor& beat) {
  Prediction p;
  p.probs = softmax(forward(model, beat));
  p.label = 0;
  for (std::int64_t i = 1; i < p.probs.dim(0); ++i) {
    if (p.probs[i] > p.probs[p.label]) p.label = static_cast<int>(i);
  }
  return p;
}

Prediction predict(const Model& model, const BeatRecord& beat) {
  return predict(model, beat_to_tensor(beat));
}

void Gradients::accumulate(const Gradients& other) {
  for (std::size_t i = 0; i < dweight.size(); ++i) {
    if (dweight[i].empty()) continue;
    double* dst = dweight[i].data();
    const double* src = other.dweight[i].data();
    for (std::int64_t j = 0; j < dweight[i].numel(); ++j) dst[j] += src[j];
    double* dstb = dbias[i].data();
    const double* srcb = other.dbias[i].data();
    for (std::int64_t j = 0; j < dbias[i].numel(); ++j) dstb[j] += srcb[j];
  }
}

void Gradients::scale(double s) {
  for (std::size_t i = 0; i < dweight.size(); ++i) {
    if (dweight[i].empty()) continue;
    double* w = dweight[i].data();
    for (std::int64_t j = 0; j < dweight[i].numel(); ++j) w[j] *= s;
    double* b = dbias[i].data();
    for (std::int64_t j = 0; j < dbias[i].numel(); ++j) b[j] *= s;
  }
}

void Gradients::reset() {
  for (std::size_t i = 0; i < dweight.size(); ++i) {
    if (!dweight[i].empty()) dweight[i].fill(0.0);
    if (!dbias[i].empty()) dbias[i].fill(0.0);
  }
}

Gradients zero_gradients(const Model& model) {
  Gradients g;
  g.dweight.resize(model.specs.size());
  g.dbias.resize(model.specs.size());
  for (std::size_t i = 0; i < model.specs.size(); ++i) {
    if (!model.specs[i].has_params()) continue;
    g.dweight[i] = Tensor::zeros(model.params[i].weight.shape());
    g.dbias[i] = Tensor::zeros(model.params[i].bias.shape());
  }
  return g;
}

namespace {

void add_into(Tensor& dst, const Tensor& src) {
  double* d = dst.data();
  const double* s = src.data();
  for (std::int64_t i = 0; i < dst.numel(); ++i) d[i] += s[i];
}

// Zero gradient entries at masked positions before they reach the optimizer.
void mask_gradient(Tensor& grad, const Tensor& mask) {
  if (mask.empty()) return;
  double* g = grad.data();
  const double* m = mask.data();
  for (std::int64_t i = 0; i < grad.numel(); ++i) {
    if (m[i] == 0.0) g[i] = 0.0;
  }
}

}  // namespace

void backward_into(const Model& model, const ForwardTrace& trace, int label, Gradients& out,
                   int down_to_layer) {
  if (!trace.valid) throw ConfigError("backward requires a completed forward pass");
  const int n = static_cast<int>(model.specs.size());
  if (down_to_layer < 0) down_to_layer = 0;

  Tensor d = softmax_cross_entropy_backward(softmax(trace.logits), label);

  for (int i = n - 1; i >= down_to_layer; --i) {
    const LayerSpec& spec = model.specs[static_cast<std::size_t>(i)];
    const ParamGroup& group = model.params[static_cast<std::size_t>(i)];
    const Tensor& x = trace.layer_inputs[static_cast<std::size_t>(i)];
    const bool need_dx = i > down_to_layer;
    switch (spec.kind) {
      case LayerKind::Conv: {
        if (spec.fused_relu) {
          d = relu_backward(trace.pre_activation[static_cast<std::size_t>(i)], d);
        }
        Conv1dGrads g = conv1d_backward(x, group.weight, spec.stride, d, need_dx);
        mask_gradient(g.dweight, group.mask);
        add_into(out.dweight[static_cast<std::size_t>(i)], g.dweight);
        add_into(out.dbias[static_cast<std::size_t>(i)], g.dbias);
        d = std::move(g.dinput);
        break;
      }
      case LayerKind::Activation:
        if (need_dx) d = relu_backward(x, d);
        break;
      case LayerKind::Pool:
        if (need_dx) {
          d = maxpool1d_backward(x.shape(), trace.pool_argmax[static_cast<std::size_t>(i)], d);
        }
        break;
      case LayerKind::Flatten:
        if (need_dx) {
          std::vector<double> data(d.data(), d.data() + d.numel());
          d = Tensor(x.shape(), std::move(data));
        }
        break;
      case LayerKind::Dense: {
        if (spec.fused_relu) {
          d = relu_backward(trace.pre_activation[static_cast<std::size_t>(i)], d);
        }
        DenseGrads g = dense_backward(x, group.weight, d, need_dx);
        mask_gradient(g.dweight, group.mask);
        add_into(out.dweight[static_cast<std::size_t>(i)], g.dweight);
        add_into(out.dbias[static_cast<std::size_t>(i)], g.dbias);
        d = std::move(g.dinput);
        break;
      }
    }
  }
}

Gradients backward(const Model& model, const ForwardTrace& trace, int label) {
  Gradients g = zero_gradients(model);
  backward_into(model, trace, label, g, 0);
  return g;
}

std::size_t optimizer_slots(const Model& model) { return 2 * model.specs.size(); }

void apply_gradients(Model& model, const Gradients& grads, Optimizer& opt) {
  for (std::size_t i = 0; i < model.specs.size(); ++i) {
    if (!model.specs[i].has_params()) continue;
    ParamGroup& group = model.params[i];
    const Tensor* mask = group.mask.empty() ? nullptr : &group.mask;
    opt.apply(2 * i, group.weight, grads.dweight[i], mask, group.weight_trainable);
    opt.apply(2 * i + 1, group.bias, grads.dbias[i], nullptr, group.bias_trainable);
  }
}

}  // namespace ecgprune
