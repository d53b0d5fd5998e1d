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

#include "asfl/split.hpp"

#include <string>

#include "asfl/errors.hpp"

namespace asfl {

void check_cut(const ModelSpec& spec, CutIndex cut) {
  if (cut.value > spec.layer_count()) {
    throw RangeError("cut " + std::to_string(cut.value) + " outside [0, " + std::to_string(spec.layer_count()) + "]");
  }
}

SplitModel split(const ModelSpec& spec, const ParameterSet& params, CutIndex cut) {
  check_cut(spec, cut);
  if (params.first_layer() != 0 || params.end_layer() != spec.layer_count()) {
    throw LayoutError("split needs a full parameter set");
  }
  return SplitModel{slice(params, 0, cut.value), slice(params, cut.value, spec.layer_count()), cut};
}

ParameterSet merge(const ModelSpec& spec, const SplitModel& model) {
  check_cut(spec, model.cut);
  const auto& v = model.vehicle_side;
  const auto& r = model.rsu_side;
  if (v.first_layer() != 0 || v.end_layer() != model.cut.value || r.first_layer() != model.cut.value ||
      r.end_layer() != spec.layer_count()) {
    throw LayoutError("split halves [0, " + std::to_string(v.end_layer()) + ") and [" +
                      std::to_string(r.first_layer()) + ", " + std::to_string(r.end_layer()) +
                      ") do not tile the model at cut " + std::to_string(model.cut.value));
  }
  ParameterSet merged = concat(v, r);
  if (!merged.same_layout(ParameterSet::zeros(spec, 0, spec.layer_count()))) {
    throw LayoutError("merged parameters do not match the model layout");
  }
  return merged;
}

std::uint64_t smashed_bytes(const ModelSpec& spec, CutIndex cut, std::size_t batch_size) {
  check_cut(spec, cut);
  if (cut.value == spec.layer_count()) return 0;
  const auto shapes = boundary_shapes(spec);
  return static_cast<std::uint64_t>(shapes[cut.value].numel()) * batch_size * kBytesPerScalar;
}

std::uint64_t gradient_bytes(const ModelSpec& spec, CutIndex cut, std::size_t batch_size) {
  return smashed_bytes(spec, cut, batch_size);
}

std::uint64_t label_bytes(std::size_t batch_size) { return static_cast<std::uint64_t>(batch_size) * kBytesPerScalar; }

}  // namespace asfl
