#pragma once

#include <cstdint>
#include <vector>

#include "ecgprune/dataset.hpp"
#include "ecgprune/optimizer.hpp"
#include "ecgprune/tensor.hpp"

namespace ecgprune {

enum class LayerKind : std::uint8_t { Conv, Activation, Pool, Flatten, Dense };

// One row of the 10-layer table. Geometry fields are kind-specific; unused
// fields stay zero. The ReLUs after the third conv and the first dense layer
// are fused into their owning layer (fused_relu) so the table keeps exactly
// ten rows; fused activations are excluded from the per-layer FLOPs rows.
struct LayerSpec {
  LayerKind kind = LayerKind::Activation;
  std::int64_t in_channels = 0;   // conv: input channels; dense: input features
  std::int64_t out_channels = 0;  // conv: output channels; dense: output features
  std::int64_t kernel = 0;        // conv/pool window
  std::int64_t stride = 1;        // conv/pool stride
  bool fused_relu = false;
  bool prunable = false;

  bool has_params() const { return kind == LayerKind::Conv || kind == LayerKind::Dense; }
};

struct ParamGroup {
  Tensor weight;
  Tensor bias;
  Tensor mask;  // 0/1, congruent to weight; empty unless the layer is prunable
  bool weight_trainable = true;
  bool bias_trainable = true;

  bool empty() const { return weight.empty(); }
};

struct EpochStats {
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

struct Model {
  std::vector<LayerSpec> specs;
  std::vector<ParamGroup> params;  // parallel to specs; empty group where no params
  std::uint64_t seed = 0;
  std::vector<EpochStats> history;

  std::vector<int> param_layers() const;
  std::vector<int> prunable_layers() const;

  // Zero weights wherever the mask is zero.
  void enforce_masks();
  std::int64_t mask_zero_count(int layer) const;

  // Lowest layer index holding a trainable parameter group, or specs.size()
  // when everything is frozen.
  int lowest_trainable_layer() const;
};

// The 10-layer baseline: input [1,260] ->
//   conv(128,k50,s3) -> relu -> pool(k2,s3) -> conv(32,k7,s1) -> relu ->
//   pool(k2,s2) -> conv(32,k9,s1)+relu -> flatten -> dense(128)+relu ->
//   dense(5).
// Conv output lengths 71 / 18 / 1 are asserted at construction. Weights use
// scaled-uniform fan-in initialization from the seed; biases start at zero;
// masks start all-ones; everything is trainable.
Model build_baseline(std::uint64_t seed);

struct ForwardTrace {
  bool valid = false;
  std::vector<Tensor> layer_inputs;                    // input tensor per layer
  std::vector<std::vector<std::int64_t>> pool_argmax;  // per layer; used by pools
  std::vector<Tensor> pre_activation;                  // per layer; used by fused relu
  Tensor logits;
};

// Runs the layer chain on a [1,260] beat and returns the logits. When trace
// is given it records what backward() needs.
Tensor forward(const Model& model, const Tensor& beat, ForwardTrace* trace = nullptr);

struct Prediction {
  int label = 0;   // argmax class, first index wins ties
  Tensor probs;    // [5], sums to 1
};
Prediction predict(const Model& model, const Tensor& beat);
Prediction predict(const Model& model, const BeatRecord& beat);

// Per-parameter gradient tensors, congruent with the model's parameters.
struct Gradients {
  std::vector<Tensor> dweight;  // parallel to model.specs
  std::vector<Tensor> dbias;

  void accumulate(const Gradients& other);
  void scale(double s);
  void reset();
};

Gradients zero_gradients(const Model& model);

// Gradients of the softmax cross-entropy loss at `label` with respect to the
// parameters of every layer at index >= down_to_layer. Masked weight
// positions receive exactly 0. Requires a trace produced by forward();
// throws ConfigError otherwise. Gradients are accumulated (+=) into `out`.
void backward_into(const Model& model, const ForwardTrace& trace, int label, Gradients& out,
                   int down_to_layer = 0);
Gradients backward(const Model& model, const ForwardTrace& trace, int label);

// One optimizer step over every parameter group. The optimizer must have
// been created with 2 * specs.size() slots; call opt.advance() beforehand.
// Masked positions and untrainable groups stay bit-identical.
void apply_gradients(Model& model, const Gradients& grads, Optimizer& opt);

// Number of optimizer slots a model needs (one per weight and bias tensor).
std::size_t optimizer_slots(const Model& model);

}  // namespace ecgprune
