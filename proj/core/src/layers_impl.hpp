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

#include <cstdint>
#include <span>
#include <vector>

#include "asfl/model.hpp"

namespace asfl::detail {

struct LayerState {
  std::vector<Tensor> saved;
  std::vector<std::size_t> argmax;
};

/// Per-sample output shape of a layer; throws ShapeError mentioning `index`.
TensorShape output_shape(const LayerKind& kind, const TensorShape& in, std::size_t index);

std::uint64_t forward_flops(const LayerKind& kind, const TensorShape& in_sample);

void layer_forward(const LayerKind& kind, std::span<const double> params, const Tensor& x, Tensor& y,
                   const TensorShape& y_sample, LayerState& state);

/// Accumulates into `dparams`; writes `dx` when non-null.
void layer_backward(const LayerKind& kind, std::span<const double> params, const Tensor& x,
                    const std::vector<Tensor>& saved, const std::vector<std::size_t>& argmax, const Tensor& dy,
                    std::span<double> dparams, Tensor* dx);

/// Shapes of the individual weight tensors of a layer as (fan_in, fan_out, count) triples,
/// followed by bias lengths. Used for initialization.
struct WeightBlock {
  std::size_t fan_in = 0;
  std::size_t fan_out = 0;
  std::size_t weights = 0;
  std::size_t biases = 0;
};
std::vector<WeightBlock> weight_blocks(const LayerKind& kind);

}  // namespace asfl::detail
