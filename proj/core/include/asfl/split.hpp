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
#include <vector>

#include "asfl/model.hpp"

namespace asfl {

/// Boundary index of a cut. 0 leaves the vehicle side empty, L leaves the RSU side empty.
struct CutIndex {
  std::size_t value = 0;

  auto operator<=>(const CutIndex&) const = default;
};

/// Throws RangeError unless 0 <= cut <= L.
void check_cut(const ModelSpec& spec, CutIndex cut);

/// Vehicle-side parameters for layers [0, cut) and RSU-side parameters for [cut, L).
struct SplitModel {
  ParameterSet vehicle_side;
  ParameterSet rsu_side;
  CutIndex cut;
};

SplitModel split(const ModelSpec& spec, const ParameterSet& params, CutIndex cut);

/// Exact inverse of split(). Throws LayoutError when the halves do not tile [0, L)
/// at the recorded cut or do not match the spec's layout.
ParameterSet merge(const ModelSpec& spec, const SplitModel& model);

/// Activations at the cut for one batch, sent vehicle -> RSU together with the labels.
struct SmashedBatch {
  Tensor activations;
  std::vector<int> labels;
  std::size_t producer = 0;
  CutIndex cut;

  std::uint64_t bytes() const noexcept { return activations.size() * kBytesPerScalar; }
  std::uint64_t label_bytes() const noexcept { return labels.size() * kBytesPerScalar; }
};

/// Bytes of the cut-layer activations for a batch: boundary element count * batch * 4.
/// Cut 0 ships the raw input; cut L exchanges nothing.
std::uint64_t smashed_bytes(const ModelSpec& spec, CutIndex cut, std::size_t batch_size);

/// The smashed-data gradient has the activations' shape, hence the same size.
std::uint64_t gradient_bytes(const ModelSpec& spec, CutIndex cut, std::size_t batch_size);

/// One 32-bit label per sample.
std::uint64_t label_bytes(std::size_t batch_size);

}  // namespace asfl
