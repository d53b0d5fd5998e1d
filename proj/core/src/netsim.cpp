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

#include "asfl/netsim.hpp"

#include <cmath>
#include <random>
#include <string>

#include "asfl/errors.hpp"
#include "asfl/random.hpp"

namespace asfl {

namespace {
constexpr std::uint64_t kChannelStream = 0xc4a7;
}

void check_profile(const VehicleProfile& p) {
  const std::string who = "vehicle " + std::to_string(p.id) + ": ";
  if (!(p.compute_capacity > 0.0)) throw RangeError(who + "compute capacity must be positive");
  if (!(p.rate.mean_rate > 0.0)) throw RangeError(who + "mean rate must be positive");
  if (!(p.rate.jitter >= 0.0 && p.rate.jitter < 1.0)) throw RangeError(who + "jitter must lie in [0, 1)");
  if (!(p.dwell_time > 0.0)) throw RangeError(who + "dwell time must be positive");
}

void check_profile(const RsuProfile& p) {
  if (!(p.compute_capacity > 0.0)) throw RangeError("rsu: compute capacity must be positive");
  if (!(p.broadcast_rate > 0.0)) throw RangeError("rsu: broadcast rate must be positive");
}

ChannelSample sample_rate(const VehicleProfile& profile, std::size_t round, std::uint64_t seed) {
  ChannelSample s{profile.id, round, profile.rate.mean_rate};
  if (profile.rate.jitter > 0.0) {
    auto rng = make_rng({seed, kChannelStream, profile.id, round});
    std::uniform_real_distribution<double> u(1.0 - profile.rate.jitter, 1.0 + profile.rate.jitter);
    s.rate = profile.rate.mean_rate * u(rng);
  }
  return s;
}

double comm_time(std::uint64_t bytes, double rate) {
  if (!(rate > 0.0)) throw RangeError("transmission rate must be positive");
  return 8.0 * static_cast<double>(bytes) / rate;
}

double comp_time(double flops, double capacity) {
  if (!(capacity > 0.0)) throw RangeError("compute capacity must be positive");
  return flops / capacity;
}

bool check_dwell(const VehicleProfile& profile, double elapsed_seconds) {
  if (std::isinf(profile.dwell_time)) return true;
  return elapsed_seconds < profile.dwell_time;
}

}  // namespace asfl
