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
#include <vector>

#include "asfl/netsim.hpp"

namespace asfl {

/// Work and traffic of one local training step (one batch) of one vehicle.
struct StepCost {
  double vehicle_forward_flops = 0.0;
  double vehicle_backward_flops = 0.0;
  double rsu_flops = 0.0;
  std::uint64_t up_bytes = 0;    // smashed data + labels
  std::uint64_t down_bytes = 0;  // smashed-data gradient
};

/// Everything the time model needs about one vehicle in one round.
struct VehicleTrace {
  std::size_t vehicle = 0;
  double capacity = 0.0;   // vehicle FLOPs/s
  double up_rate = 0.0;    // bits/s
  double down_rate = 0.0;  // bits/s
  std::uint64_t model_down_bytes = 0;
  std::uint64_t model_up_bytes = 0;
  std::uint64_t data_up_bytes = 0;
  std::vector<StepCost> steps;
};

/// Busy time per resource class, summed over vehicles.
struct PhaseSeconds {
  double vehicle_compute = 0.0;
  double rsu_compute = 0.0;
  double communication = 0.0;

  double total() const noexcept { return vehicle_compute + rsu_compute + communication; }
};

struct RoundTiming {
  double wall_clock = 0.0;
  PhaseSeconds phases;
  /// Offset from round start at which each trace's last upload completes (same order as input).
  std::vector<double> finish;
};

/// FL: every vehicle downloads, trains and uploads independently; the round
/// lasts as long as the slowest vehicle plus aggregation at the RSU.
RoundTiming time_parallel_local(std::span<const VehicleTrace> traces, const RsuProfile& rsu, double aggregate_flops);

/// SFL/ASFL: download in parallel; then each local step runs vehicle forward +
/// upload in parallel (max), RSU passes for every vehicle one after another (sum),
/// gradient download + vehicle backward in parallel (max); upload in parallel; aggregate.
RoundTiming time_lockstep(std::span<const VehicleTrace> traces, const RsuProfile& rsu, double aggregate_flops);

/// SL: vehicles one after another, nothing overlaps.
RoundTiming time_sequential(std::span<const VehicleTrace> traces, const RsuProfile& rsu);

/// CL: parallel raw-data upload, then RSU-side training of `rsu_flops`.
RoundTiming time_centralized(std::span<const VehicleTrace> traces, const RsuProfile& rsu, double rsu_flops);

}  // namespace asfl
