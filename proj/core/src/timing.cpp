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

#include "asfl/timing.hpp"

#include <algorithm>

namespace asfl {

namespace {

double vehicle_seconds(const VehicleTrace& t, double flops) { return comp_time(flops, t.capacity); }

}  // namespace

RoundTiming time_parallel_local(std::span<const VehicleTrace> traces, const RsuProfile& rsu, double aggregate_flops) {
  RoundTiming out;
  double slowest = 0.0;
  for (const auto& t : traces) {
    double flops = 0.0;
    for (const auto& s : t.steps) flops += s.vehicle_forward_flops + s.vehicle_backward_flops + s.rsu_flops;
    const double comm = comm_time(t.model_down_bytes, t.down_rate) + comm_time(t.model_up_bytes, t.up_rate);
    const double comp = vehicle_seconds(t, flops);
    out.phases.communication += comm;
    out.phases.vehicle_compute += comp;
    out.finish.push_back(comm + comp);
    slowest = std::max(slowest, comm + comp);
  }
  const double agg = comp_time(aggregate_flops, rsu.compute_capacity);
  out.phases.rsu_compute += agg;
  out.wall_clock = slowest + agg;
  return out;
}

RoundTiming time_lockstep(std::span<const VehicleTrace> traces, const RsuProfile& rsu, double aggregate_flops) {
  RoundTiming out;
  out.finish.assign(traces.size(), 0.0);

  double clock = 0.0;
  std::size_t max_steps = 0;
  for (const auto& t : traces) {
    const double down = comm_time(t.model_down_bytes, t.down_rate);
    out.phases.communication += down;
    clock = std::max(clock, down);
    max_steps = std::max(max_steps, t.steps.size());
  }

  std::vector<double> last_step_end(traces.size(), clock);
  for (std::size_t step = 0; step < max_steps; ++step) {
    double upward = 0.0, rsu_total = 0.0, downward = 0.0;
    for (const auto& t : traces) {
      if (step >= t.steps.size()) continue;
      const auto& s = t.steps[step];
      const double fwd = vehicle_seconds(t, s.vehicle_forward_flops);
      const double up = comm_time(s.up_bytes, t.up_rate);
      const double rsu_time = comp_time(s.rsu_flops, rsu.compute_capacity);
      const double down = comm_time(s.down_bytes, t.down_rate);
      const double bwd = vehicle_seconds(t, s.vehicle_backward_flops);
      upward = std::max(upward, fwd + up);
      rsu_total += rsu_time;
      downward = std::max(downward, down + bwd);
      out.phases.vehicle_compute += fwd + bwd;
      out.phases.communication += up + down;
      out.phases.rsu_compute += rsu_time;
    }
    clock += upward + rsu_total + downward;
    for (std::size_t i = 0; i < traces.size(); ++i) {
      if (step < traces[i].steps.size()) last_step_end[i] = clock;
    }
  }

  double upload_end = clock;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const double up = comm_time(traces[i].model_up_bytes, traces[i].up_rate);
    out.phases.communication += up;
    out.finish[i] = last_step_end[i] + up;
    upload_end = std::max(upload_end, clock + up);
  }
  const double agg = comp_time(aggregate_flops, rsu.compute_capacity);
  out.phases.rsu_compute += agg;
  out.wall_clock = upload_end + agg;
  return out;
}

RoundTiming time_sequential(std::span<const VehicleTrace> traces, const RsuProfile& rsu) {
  RoundTiming out;
  double clock = 0.0;
  for (const auto& t : traces) {
    double comm = comm_time(t.model_down_bytes, t.down_rate) + comm_time(t.model_up_bytes, t.up_rate);
    double vcomp = 0.0, rcomp = 0.0;
    for (const auto& s : t.steps) {
      vcomp += vehicle_seconds(t, s.vehicle_forward_flops + s.vehicle_backward_flops);
      rcomp += comp_time(s.rsu_flops, rsu.compute_capacity);
      comm += comm_time(s.up_bytes, t.up_rate) + comm_time(s.down_bytes, t.down_rate);
    }
    out.phases.communication += comm;
    out.phases.vehicle_compute += vcomp;
    out.phases.rsu_compute += rcomp;
    clock += comm + vcomp + rcomp;
    out.finish.push_back(clock);
  }
  out.wall_clock = clock;
  return out;
}

RoundTiming time_centralized(std::span<const VehicleTrace> traces, const RsuProfile& rsu, double rsu_flops) {
  RoundTiming out;
  double upload = 0.0;
  for (const auto& t : traces) {
    const double up = comm_time(t.data_up_bytes, t.up_rate);
    out.phases.communication += up;
    out.finish.push_back(up);
    upload = std::max(upload, up);
  }
  const double train = comp_time(rsu_flops, rsu.compute_capacity);
  out.phases.rsu_compute += train;
  out.wall_clock = upload + train;
  return out;
}

}  // namespace asfl
