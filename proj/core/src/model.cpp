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

#include "asfl/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <utility>

#include "asfl/errors.hpp"
#include "layers_impl.hpp"

namespace asfl {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void check_range(const ModelSpec& spec, std::size_t from, std::size_t to) {
  if (from > to || to > spec.layer_count()) {
    throw RangeError("invalid layer range [" + std::to_string(from) + ", " + std::to_string(to) + ") for a " +
                     std::to_string(spec.layer_count()) + "-layer model");
  }
}

void check_params(const ParameterSet& params, std::size_t from, std::size_t to) {
  if (!params.covers(from, to)) {
    throw LayoutError("parameters cover layers [" + std::to_string(params.first_layer()) + ", " +
                      std::to_string(params.end_layer()) + "), need [" + std::to_string(from) + ", " +
                      std::to_string(to) + ")");
  }
}

}  // namespace

std::string kind_name(const LayerKind& kind) {
  return std::visit(overloaded{
                        [](const Dense&) { return std::string("dense"); },
                        [](const Conv2d&) { return std::string("conv2d"); },
                        [](const Relu&) { return std::string("relu"); },
                        [](const MaxPool&) { return std::string("maxpool"); },
                        [](const AvgPoolGlobal&) { return std::string("avgpool_global"); },
                        [](const Flatten&) { return std::string("flatten"); },
                        [](const ResidualBlock&) { return std::string("residual_block"); },
                    },
                    kind);
}

std::string describe(const LayerKind& kind) {
  using std::to_string;
  return std::visit(
      overloaded{
          [](const Dense& d) { return "dense(" + to_string(d.in) + "," + to_string(d.out) + ")"; },
          [](const Conv2d& c) {
            return "conv2d(" + to_string(c.in_ch) + "," + to_string(c.out_ch) + ",k=" + to_string(c.kernel) +
                   ",s=" + to_string(c.stride) + ",p=" + to_string(c.pad) + ")";
          },
          [](const Relu&) { return std::string("relu"); },
          [](const MaxPool& p) { return "maxpool(" + to_string(p.kernel) + "," + to_string(p.stride) + ")"; },
          [](const AvgPoolGlobal&) { return std::string("avgpool_global"); },
          [](const Flatten&) { return std::string("flatten"); },
          [](const ResidualBlock& r) { return "residual_block(" + to_string(r.channels) + ")"; },
      },
      kind);
}

ModelSpec make_model(std::vector<LayerKind> layers, TensorShape input_shape, std::size_t num_classes) {
  ModelSpec spec;
  spec.input_shape = std::move(input_shape);
  spec.num_classes = num_classes;
  spec.layers.reserve(layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i) spec.layers.push_back(LayerSpec{std::move(layers[i]), i});
  validate(spec);
  return spec;
}

std::vector<TensorShape> boundary_shapes(const ModelSpec& spec) {
  if (spec.input_shape.rank() == 0) throw ShapeError("model input shape is empty");
  std::vector<TensorShape> shapes;
  shapes.reserve(spec.layer_count() + 1);
  shapes.push_back(spec.input_shape);
  for (std::size_t i = 0; i < spec.layer_count(); ++i) {
    shapes.push_back(detail::output_shape(spec.layers[i].kind, shapes.back(), i));
  }
  return shapes;
}

void validate(const ModelSpec& spec) {
  if (spec.layers.empty()) throw ShapeError("model has no layers");
  if (spec.num_classes == 0) throw ShapeError("num_classes must be positive");
  for (std::size_t i = 0; i < spec.layer_count(); ++i) {
    if (spec.layers[i].id != i) {
      throw ShapeError("layer " + std::to_string(i) + " carries id " + std::to_string(spec.layers[i].id));
    }
  }
  const auto shapes = boundary_shapes(spec);
  if (shapes.back() != TensorShape{spec.num_classes}) {
    throw ShapeError("shape mismatch at layer " + std::to_string(spec.layer_count() - 1) + " (" +
                     describe(spec.layers.back().kind) + "): model output " + shapes.back().str() + " is not " +
                     std::to_string(spec.num_classes) + " logits");
  }
}

std::size_t param_count(const LayerKind& kind) {
  std::size_t n = 0;
  for (const auto& wb : detail::weight_blocks(kind)) n += wb.weights + wb.biases;
  return n;
}

std::size_t param_count(const ModelSpec& spec, std::size_t from, std::size_t to) {
  check_range(spec, from, to);
  std::size_t n = 0;
  for (std::size_t i = from; i < to; ++i) n += param_count(spec.layers[i].kind);
  return n;
}

std::size_t param_count(const ModelSpec& spec) { return param_count(spec, 0, spec.layer_count()); }

// ---------------------------------------------------------------------------

ParameterSet ParameterSet::zeros(const ModelSpec& spec, std::size_t first, std::size_t end) {
  check_range(spec, first, end);
  ParameterSet p;
  p.first_ = first;
  std::size_t offset = 0;
  for (std::size_t i = first; i < end; ++i) {
    const std::size_t n = param_count(spec.layers[i].kind);
    p.slots_.push_back({offset, n});
    offset += n;
  }
  p.values_.assign(offset, 0.0);
  return p;
}

ParameterSet ParameterSet::zeros_like(const ParameterSet& other) {
  ParameterSet p = other;
  std::fill(p.values_.begin(), p.values_.end(), 0.0);
  return p;
}

std::span<double> ParameterSet::layer(std::size_t index) {
  if (index < first_ || index >= end_layer()) throw RangeError("layer " + std::to_string(index) + " not in parameter set");
  const auto& s = slots_[index - first_];
  return std::span<double>(values_).subspan(s.offset, s.length);
}

std::span<const double> ParameterSet::layer(std::size_t index) const {
  if (index < first_ || index >= end_layer()) throw RangeError("layer " + std::to_string(index) + " not in parameter set");
  const auto& s = slots_[index - first_];
  return std::span<const double>(values_).subspan(s.offset, s.length);
}

ParameterSet concat(const ParameterSet& front, const ParameterSet& back) {
  if (front.end_layer() != back.first_layer()) {
    throw LayoutError("cannot join layers [" + std::to_string(front.first_layer()) + ", " +
                      std::to_string(front.end_layer()) + ") with [" + std::to_string(back.first_layer()) + ", " +
                      std::to_string(back.end_layer()) + ")");
  }
  ParameterSet out = front;
  const std::size_t shift = front.values_.size();
  for (auto s : back.slots_) {
    s.offset += shift;
    out.slots_.push_back(s);
  }
  out.values_.insert(out.values_.end(), back.values_.begin(), back.values_.end());
  return out;
}

ParameterSet slice(const ParameterSet& params, std::size_t first, std::size_t end) {
  if (first > end || !params.covers(first, end)) {
    throw RangeError("cannot slice [" + std::to_string(first) + ", " + std::to_string(end) + ") out of [" +
                     std::to_string(params.first_layer()) + ", " + std::to_string(params.end_layer()) + ")");
  }
  ParameterSet out;
  out.first_ = first;
  if (first == end) return out;
  const std::size_t base = params.slots_[first - params.first_].offset;
  for (std::size_t i = first; i < end; ++i) {
    auto s = params.slots_[i - params.first_];
    s.offset -= base;
    out.slots_.push_back(s);
  }
  const auto& last = params.slots_[end - 1 - params.first_];
  out.values_.assign(params.values_.begin() + static_cast<std::ptrdiff_t>(base),
                     params.values_.begin() + static_cast<std::ptrdiff_t>(last.offset + last.length));
  return out;
}

ParameterSet build_model(const ModelSpec& spec, std::uint64_t seed) {
  validate(spec);
  ParameterSet params = ParameterSet::zeros(spec, 0, spec.layer_count());
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < spec.layer_count(); ++i) {
    auto values = params.layer(i);
    std::size_t offset = 0;
    const auto blocks = detail::weight_blocks(spec.layers[i].kind);
    // weights of each block, then its biases (left at zero)
    for (const auto& wb : blocks) {
      const double limit = std::sqrt(6.0 / static_cast<double>(wb.fan_in + wb.fan_out));
      std::uniform_real_distribution<double> dist(-limit, limit);
      for (std::size_t k = 0; k < wb.weights; ++k) values[offset + k] = dist(rng);
      offset += wb.weights + wb.biases;
    }
  }
  return params;
}

// ---------------------------------------------------------------------------

void check_batch(const Batch& batch, std::size_t num_classes) {
  if (batch.inputs.shape().rank() == 0 || batch.inputs.shape()[0] != batch.labels.size()) {
    throw DataError("batch has " + std::to_string(batch.labels.size()) + " labels but inputs of shape " +
                    batch.inputs.shape().str());
  }
  for (int label : batch.labels) {
    if (label < 0 || static_cast<std::size_t>(label) >= num_classes) {
      throw DataError("label " + std::to_string(label) + " outside [0, " + std::to_string(num_classes) + ")");
    }
  }
}

namespace {

ForwardResult run_forward(const ModelSpec& spec, const ParameterSet& params, const Tensor& input, std::size_t from,
                          std::size_t to, bool keep) {
  check_range(spec, from, to);
  check_params(params, from, to);
  const auto shapes = boundary_shapes(spec);
  const auto& in = input.shape();
  if (in.rank() < 2 || in.sample() != shapes[from]) {
    throw ShapeError("shape mismatch at boundary " + std::to_string(from) + ": expected Bx" + shapes[from].str() +
                     ", got " + in.str());
  }

  ForwardResult result;
  ForwardCache& cache = result.cache;
  cache.from = from;
  cache.to = to;
  cache.model_layers = spec.layer_count();

  Tensor current = input;
  for (std::size_t i = from; i < to; ++i) {
    detail::LayerState state;
    Tensor next;
    detail::layer_forward(spec.layers[i].kind, params.layer(i), current, next, shapes[i + 1], state);
    if (keep) {
      cache.inputs.push_back(std::move(current));
      cache.saved.push_back(std::move(state.saved));
      cache.argmax.push_back(std::move(state.argmax));
    }
    current = std::move(next);
  }
  cache.output_shape = current.shape();
  result.output = std::move(current);
  return result;
}

}  // namespace

ForwardResult forward(const ModelSpec& spec, const ParameterSet& params, const Tensor& input, std::size_t from,
                      std::size_t to) {
  return run_forward(spec, params, input, from, to, true);
}

Tensor infer(const ModelSpec& spec, const ParameterSet& params, const Tensor& input, std::size_t from,
             std::size_t to) {
  return run_forward(spec, params, input, from, to, false).output;
}

Gradients backward(const ModelSpec& spec, const ParameterSet& params, const ForwardCache& cache,
                   const Tensor& upstream, bool want_input_grad) {
  if (cache.model_layers != spec.layer_count() || cache.to > spec.layer_count() || cache.from > cache.to ||
      cache.inputs.size() != cache.to - cache.from || cache.saved.size() != cache.inputs.size()) {
    throw LayoutError("forward cache does not belong to this model");
  }
  check_params(params, cache.from, cache.to);
  if (upstream.shape() != cache.output_shape) {
    throw ShapeError("upstream gradient of shape " + upstream.shape().str() + " does not match forward output " +
                     cache.output_shape.str());
  }
  const auto shapes = boundary_shapes(spec);
  for (std::size_t i = cache.from; i < cache.to; ++i) {
    if (cache.inputs[i - cache.from].shape().sample() != shapes[i]) {
      throw LayoutError("forward cache is stale: layer " + std::to_string(i) + " input shape changed");
    }
  }

  Gradients grads;
  grads.params = ParameterSet::zeros_like(params);
  Tensor dy = upstream;
  for (std::size_t i = cache.to; i-- > cache.from;) {
    const std::size_t k = i - cache.from;
    const bool need_dx = want_input_grad || i > cache.from;
    Tensor dx;
    detail::layer_backward(spec.layers[i].kind, params.layer(i), cache.inputs[k], cache.saved[k], cache.argmax[k], dy,
                           grads.params.layer(i), need_dx ? &dx : nullptr);
    dy = std::move(dx);
  }
  if (want_input_grad) grads.input = std::move(dy);
  return grads;
}

LossResult softmax_cross_entropy(const Tensor& logits, std::span<const int> labels) {
  const auto& shape = logits.shape();
  if (shape.rank() != 2 || shape[0] != labels.size()) {
    throw ShapeError("logits of shape " + shape.str() + " do not match " + std::to_string(labels.size()) + " labels");
  }
  const std::size_t rows = shape[0], classes = shape[1];
  LossResult out;
  out.grad = Tensor(shape);
  const double inv_rows = 1.0 / static_cast<double>(rows);
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const int label = labels[r];
    if (label < 0 || static_cast<std::size_t>(label) >= classes) {
      throw RangeError("label " + std::to_string(label) + " outside [0, " + std::to_string(classes) + ")");
    }
    const double* z = logits.data() + r * classes;
    const double zmax = *std::max_element(z, z + classes);
    double sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) sum += std::exp(z[c] - zmax);
    const double log_sum = std::log(sum);
    total += log_sum - (z[label] - zmax);
    double* g = out.grad.data() + r * classes;
    for (std::size_t c = 0; c < classes; ++c) g[c] = std::exp(z[c] - zmax - log_sum) * inv_rows;
    g[label] -= inv_rows;
  }
  out.loss = total * inv_rows;
  return out;
}

void sgd_update(ParameterSet& params, const ParameterSet& grads, double lr) {
  if (!params.same_layout(grads)) throw LayoutError("gradient layout does not match parameters");
  auto p = params.values();
  auto g = grads.values();
  for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr * g[i];
}

ParameterSet sgd_step(ParameterSet params, const ParameterSet& grads, double lr) {
  sgd_update(params, grads, lr);
  return params;
}

std::uint64_t param_bytes(const ModelSpec& spec, std::size_t from, std::size_t to) {
  return static_cast<std::uint64_t>(param_count(spec, from, to)) * kBytesPerScalar;
}

std::uint64_t flops(const ModelSpec& spec, std::size_t from, std::size_t to, std::size_t batch) {
  check_range(spec, from, to);
  const auto shapes = boundary_shapes(spec);
  std::uint64_t total = 0;
  for (std::size_t i = from; i < to; ++i) total += detail::forward_flops(spec.layers[i].kind, shapes[i]);
  return total * batch;
}

std::uint64_t backward_flops(const ModelSpec& spec, std::size_t from, std::size_t to, std::size_t batch) {
  return kBackwardFlopFactor * flops(spec, from, to, batch);
}

}  // namespace asfl
