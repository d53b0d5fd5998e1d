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
#include <limits>

namespace asfl {

inline constexpr double kInfiniteDwell = std::numeric_limits<double>::infinity();

struct RateModel {
  double mean_rate = 0.0;  // bits per second
  double jitter = 0.0;     // per-round rate is mean_rate * U[1 - jitter, 1 + jitter]
};

struct VehicleProfile {
  std::size_t id = 0;
  double compute_capacity = 0.0;  // FLOPs per second
  RateModel rate;
  double dwell_time = kInfiniteDwell;  // seconds inside RSU range, from experiment start
};

/// Throws RangeError on a non-positive capacity/mean rate, jitter outside [0, 1) or dwell <= 0.
void check_profile(const VehicleProfile& profile);

struct RsuProfile {
  double compute_capacity = 0.0;  // FLOPs per second
  double broadcast_rate = 0.0;    // bits per second; caps every downlink
};

void check_profile(const RsuProfile& profile);

struct ChannelSample {
  std::size_t vehicle = 0;
  std::size_t round = 0;
  double rate = 0.0;  // bits per second
};

/// Pure function of (profile id, round, seed).
ChannelSample sample_rate(const VehicleProfile& profile, std::size_t round, std::uint64_t seed);

/// 8 * bytes / rate.
double comm_time(std::uint64_t bytes, double rate);
/// flops / capacity.
double comp_time(double flops, double capacity);

/// True while the vehicle is still inside RSU range.
bool check_dwell(const VehicleProfile& profile, double elapsed_seconds);

}  // namespace asfl
