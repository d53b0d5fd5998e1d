/**
 * Copyright 2026 The asfl-sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "asfl/tensor.hpp"

namespace asfl {

// Every scalar is accounted as a 32-bit real on the wire, whatever the in-memory precision.
inline constexpr std::uint64_t kBytesPerScalar = 4;
// Backward pass costs this many times the forward FLOPs.
inline constexpr std::uint64_t kBackwardFlopFactor = 2;

// ---------------------------------------------------------------------------
// Layer and model descriptions
// ---------------------------------------------------------------------------

/// Fully connected layer. Inputs with more than one trailing dimension are
/// flattened per sample, so `in` is the per-sample element count.
struct Dense {
  std::size_t in = 0;
  std::size_t out = 0;
};

/// 2-D convolution over [channels, height, width] samples with square kernels.
struct Conv2d {
  std::size_t in_ch = 0;
  std::size_t out_ch = 0;
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::size_t pad = 0;
};

struct Relu {};

struct MaxPool {
  std::size_t kernel = 2;
  std::size_t stride = 2;
};

/// Mean over the spatial extent: [C, H, W] -> [C].
struct AvgPoolGlobal {};

struct Flatten {};

/// conv3x3 -> relu -> conv3x3 -> (+ input) -> relu, channel count preserved.
/// The skip connection lives entirely inside the block, so a cut never lands inside it.
struct ResidualBlock {
  std::size_t channels = 0;
};

using LayerKind = std::variant<Dense, Conv2d, Relu, MaxPool, AvgPoolGlobal, Flatten, ResidualBlock>;

struct LayerSpec {
  LayerKind kind;
  std::size_t id = 0;  // position in the top-level chain
};

std::string kind_name(const LayerKind& kind);
std::string describe(const LayerKind& kind);

/// A chain of top-level layers. Boundary i sits before layer i, so a model with
/// L layers has boundaries 0..L and L-1 interior split points.
struct ModelSpec {
  std::vector<LayerSpec> layers;
  TensorShape input_shape;  // per sample, no batch extent
  std::size_t num_classes = 0;

  std::size_t layer_count() const noexcept { return layers.size(); }
  std::size_t split_boundaries() const noexcept { return layers.empty() ? 0 : layers.size() - 1; }
};

/// Builds a spec with sequential layer ids and validates it.
ModelSpec make_model(std::vector<LayerKind> layers, TensorShape input_shape, std::size_t num_classes);

/// Per-sample activation shape at every boundary 0..L. Throws ShapeError naming the
/// first layer whose input does not match.
std::vector<TensorShape> boundary_shapes(const ModelSpec& spec);

/// Checks that the chain composes from input_shape to a [num_classes] logits vector.
void validate(const ModelSpec& spec);

std::size_t param_count(const LayerKind& kind);
std::size_t param_count(const ModelSpec& spec, std::size_t from, std::size_t to);
std::size_t param_count(const ModelSpec& spec);

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

struct ParamSlot {
  std::size_t offset = 0;
  std::size_t length = 0;

  bool operator==(const ParamSlot&) const = default;
};

/// Flat trainable parameters for the contiguous layer range [first_layer, end_layer).
/// A full model covers [0, L); split halves cover the two sides of a cut.
class ParameterSet {
 public:
  ParameterSet() = default;

  static ParameterSet zeros(const ModelSpec& spec, std::size_t first, std::size_t end);
  static ParameterSet zeros_like(const ParameterSet& other);

  std::size_t first_layer() const noexcept { return first_; }
  std::size_t end_layer() const noexcept { return first_ + slots_.size(); }
  bool covers(std::size_t from, std::size_t to) const noexcept { return first_ <= from && to <= end_layer(); }

  std::span<const ParamSlot> layout() const noexcept { return slots_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  /// Parameters of an absolute layer index inside the covered range.
  std::span<double> layer(std::size_t index);
  std::span<const double> layer(std::size_t index) const;

  bool same_layout(const ParameterSet& other) const noexcept {
    return first_ == other.first_ && slots_ == other.slots_;
  }

  bool operator==(const ParameterSet&) const = default;

 private:
  friend ParameterSet concat(const ParameterSet& front, const ParameterSet& back);
  friend ParameterSet slice(const ParameterSet& params, std::size_t first, std::size_t end);

  std::size_t first_ = 0;
  std::vector<ParamSlot> slots_;
  std::vector<double> values_;
};

/// Joins two adjacent ranges; throws LayoutError unless front.end_layer() == back.first_layer().
ParameterSet concat(const ParameterSet& front, const ParameterSet& back);
/// Copies the sub-range [first, end) of a parameter set.
ParameterSet slice(const ParameterSet& params, std::size_t first, std::size_t end);

/// Glorot-uniform weights, zero biases. Deterministic in (spec, seed).
ParameterSet build_model(const ModelSpec& spec, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Propagation
// ---------------------------------------------------------------------------

struct Batch {
  Tensor inputs;            // [B, ...sample shape]
  std::vector<int> labels;  // B entries

  std::size_t size() const noexcept { return labels.size(); }
};

/// Throws DataError if the leading extent and label count disagree or a label is out of range.
void check_batch(const Batch& batch, std::size_t num_classes);

/// Everything backward() needs from a forward() call over [from, to).
struct ForwardCache {
  std::size_t from = 0;
  std::size_t to = 0;
  std::size_t model_layers = 0;
  std::vector<Tensor> inputs;                 // input of each layer in the range
  std::vector<std::vector<Tensor>> saved;     // per-layer intermediates
  std::vector<std::vector<std::size_t>> argmax;
  TensorShape output_shape;
};

struct ForwardResult {
  Tensor output;
  ForwardCache cache;
};

/// Runs layers [from, to) on `input`, whose shape must be the boundary-`from`
/// shape with a leading batch extent. from == to returns the input unchanged.
ForwardResult forward(const ModelSpec& spec, const ParameterSet& params, const Tensor& input, std::size_t from,
                      std::size_t to);

/// Same as forward() without retaining the cache.
Tensor infer(const ModelSpec& spec, const ParameterSet& params, const Tensor& input, std::size_t from,
             std::size_t to);

struct Gradients {
  ParameterSet params;  // same layout as the parameters passed in, zero outside [from, to)
  Tensor input;         // gradient w.r.t. the input at boundary `from`; empty if not requested
};

Gradients backward(const ModelSpec& spec, const ParameterSet& params, const ForwardCache& cache,
                   const Tensor& upstream, bool want_input_grad = true);

struct LossResult {
  double loss = 0.0;
  Tensor grad;  // dLoss/dLogits
};

/// Softmax cross-entropy averaged over the batch.
LossResult softmax_cross_entropy(const Tensor& logits, std::span<const int> labels);

/// params -= lr * grads, in place.
void sgd_update(ParameterSet& params, const ParameterSet& grads, double lr);
ParameterSet sgd_step(ParameterSet params, const ParameterSet& grads, double lr);

// ---------------------------------------------------------------------------
// Accounting
// ---------------------------------------------------------------------------

std::uint64_t param_bytes(const ModelSpec& spec, std::size_t from, std::size_t to);

/// Forward FLOPs over [from, to) for a batch. Dense 2*in*out, conv 2*k*k*in*out*Ho*Wo,
/// relu and pools one per input element, residual blocks two convs plus three
/// element passes, flatten free. All scaled by batch.
std::uint64_t flops(const ModelSpec& spec, std::size_t from, std::size_t to, std::size_t batch);
std::uint64_t backward_flops(const ModelSpec& spec, std::size_t from, std::size_t to, std::size_t batch);

}  // namespace asfl
