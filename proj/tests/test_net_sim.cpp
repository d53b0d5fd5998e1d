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

#include <cmath>

#include "asfl/errors.hpp"
#include "asfl/netsim.hpp"
#include "asfl/timing.hpp"
#include "doctest.h"

using namespace asfl;

namespace {

VehicleProfile vehicle(std::size_t id, double rate, double jitter) { return {id, 1e9, {rate, jitter}, kInfiniteDwell}; }

}  // namespace

TEST_CASE("sample_rate") {
  const auto v = vehicle(3, 5e6, 0.0);
  CHECK(sample_rate(v, 4, 1).rate == 5e6);
  const auto j = vehicle(3, 5e6, 0.5);
  const auto a = sample_rate(j, 4, 1);
  CHECK(a.rate == sample_rate(j, 4, 1).rate);
  CHECK(a.vehicle == 3);
  CHECK(a.round == 4);
  CHECK(a.rate != sample_rate(j, 5, 1).rate);
  CHECK(a.rate != sample_rate(j, 4, 2).rate);
  CHECK(a.rate != sample_rate(vehicle(4, 5e6, 0.5), 4, 1).rate);
  for (std::size_t t = 0; t < 200; ++t) {
    const double r = sample_rate(j, t, 9).rate;
    CHECK(r >= 2.5e6);
    CHECK(r <= 7.5e6);
  }
}

TEST_CASE("sample_rate Monte Carlo mean") {
  const auto j = vehicle(1, 1e7, 0.5);
  double sum = 0.0;
  const int n = 10000;
  for (int t = 0; t < n; ++t) sum += sample_rate(j, static_cast<std::size_t>(t), 17).rate;
  CHECK(std::abs(sum / n - 1e7) / 1e7 < 0.02);
}

TEST_CASE("comm_time and comp_time") {
  CHECK(comm_time(0, 1e6) == 0.0);
  CHECK(comm_time(1000000, 8e6) == doctest::Approx(1.0));
  CHECK(comm_time(300, 1e3) + comm_time(700, 1e3) == doctest::Approx(comm_time(1000, 1e3)));
  CHECK(comm_time(3000, 1e3) == doctest::Approx(3 * comm_time(1000, 1e3)));
  CHECK_THROWS_AS(comm_time(1, 0.0), RangeError);
  CHECK_THROWS_AS(comm_time(1, -1.0), RangeError);
  CHECK(comp_time(0, 1e9) == 0.0);
  CHECK(comp_time(1e9, 1e9) == doctest::Approx(1.0));
  CHECK(comp_time(1e9, 2e9) < comp_time(1e9, 1e9));
  CHECK_THROWS_AS(comp_time(1, 0.0), RangeError);
}

TEST_CASE("check_dwell") {
  auto v = vehicle(0, 1e6, 0.0);
  CHECK(check_dwell(v, 1e12));
  v.dwell_time = 10.0;
  CHECK(check_dwell(v, 9.99));
  CHECK_FALSE(check_dwell(v, 10.0));
  CHECK_FALSE(check_dwell(v, 10.1));
}

TEST_CASE("profile validation") {
  CHECK_NOTHROW(check_profile(vehicle(0, 1e6, 0.0)));
  CHECK_THROWS_AS(check_profile(VehicleProfile{0, 0.0, {1e6, 0.0}, kInfiniteDwell}), RangeError);
  CHECK_THROWS_AS(check_profile(vehicle(0, 0.0, 0.0)), RangeError);
  CHECK_THROWS_AS(check_profile(vehicle(0, 1e6, 1.0)), RangeError);
  CHECK_THROWS_AS(check_profile(vehicle(0, 1e6, -0.1)), RangeError);
  CHECK_THROWS_AS(check_profile(VehicleProfile{0, 1e9, {1e6, 0.0}, 0.0}), RangeError);
  CHECK_THROWS_AS(check_profile(RsuProfile{0.0, 1e9}), RangeError);
  CHECK_THROWS_AS(check_profile(RsuProfile{1e9, 0.0}), RangeError);
}

namespace {

VehicleTrace trace(double capacity, double rate, std::size_t steps) {
  VehicleTrace t;
  t.capacity = capacity;
  t.up_rate = rate;
  t.down_rate = rate;
  t.model_down_bytes = 1000;
  t.model_up_bytes = 1000;
  for (std::size_t i = 0; i < steps; ++i) t.steps.push_back({1e6, 2e6, 3e6, 500, 250});
  return t;
}

}  // namespace

TEST_CASE("parallel local timing uses the slowest vehicle") {
  const RsuProfile rsu{1e9, 1e9};
  VehicleTrace fast;
  fast.capacity = 1e9;
  fast.up_rate = fast.down_rate = 8e3;
  fast.model_down_bytes = fast.model_up_bytes = 1000;
  fast.steps.push_back({1e9, 2e9, 0, 0, 0});
  VehicleTrace slow = fast;
  slow.capacity = 5e8;
  const VehicleTrace ts[] = {fast, slow};
  const auto t = time_parallel_local(ts, rsu, 1e9);
  CHECK(t.finish[0] == doctest::Approx(2.0 + 3.0));
  CHECK(t.finish[1] == doctest::Approx(2.0 + 6.0));
  CHECK(t.wall_clock == doctest::Approx(8.0 + 1.0));
  CHECK(t.phases.communication == doctest::Approx(4.0));
  CHECK(t.phases.vehicle_compute == doctest::Approx(9.0));
  CHECK(t.phases.rsu_compute == doctest::Approx(1.0));
}

TEST_CASE("lockstep timing: max over vehicles, sum over RSU work") {
  const RsuProfile rsu{1e9, 1e9};
  const VehicleTrace a = trace(1e9, 8e3, 2);
  VehicleTrace b = trace(5e8, 8e3, 2);
  const VehicleTrace ts[] = {a, b};
  const auto t = time_lockstep(ts, rsu, 0.0);
  // download 1 s; per step: max(fwd + up) = max(1e-3, 2e-3) + 0.5, rsu 2 * 3e-3,
  // max(down + bwd) = 0.25 + max(2e-3, 4e-3); upload 1 s.
  const double step = (0.002 + 0.5) + 0.006 + (0.25 + 0.004);
  CHECK(t.wall_clock == doctest::Approx(1.0 + 2 * step + 1.0));
  CHECK(t.finish[0] == doctest::Approx(t.wall_clock));
  CHECK(t.phases.rsu_compute == doctest::Approx(4 * 0.003));

  const VehicleTrace single[] = {a};
  const auto s = time_lockstep(single, rsu, 0.0);
  CHECK(s.wall_clock == doctest::Approx(1.0 + 2 * (0.001 + 0.5 + 0.003 + 0.25 + 0.002) + 1.0));
}

TEST_CASE("sequential timing sums every vehicle") {
  const RsuProfile rsu{1e9, 1e9};
  const VehicleTrace a = trace(1e9, 8e3, 3);
  const VehicleTrace one[] = {a};
  const VehicleTrace four[] = {a, a, a, a};
  const auto t1 = time_sequential(one, rsu);
  const auto t4 = time_sequential(four, rsu);
  CHECK(t4.wall_clock == doctest::Approx(4 * t1.wall_clock));
  CHECK(t4.finish[2] == doctest::Approx(3 * t1.wall_clock));
  CHECK(t1.wall_clock == doctest::Approx(2.0 + 3 * (0.003 + 0.003 + 0.75)));
  CHECK(t4.phases.total() == doctest::Approx(t4.wall_clock));
}

TEST_CASE("centralized timing: parallel upload then RSU training") {
  const RsuProfile rsu{2e9, 1e9};
  VehicleTrace a;
  a.capacity = 1e9;
  a.up_rate = a.down_rate = 8e3;
  a.data_up_bytes = 2000;
  VehicleTrace b = a;
  b.data_up_bytes = 3000;
  const VehicleTrace ts[] = {a, b};
  const auto t = time_centralized(ts, rsu, 4e9);
  CHECK(t.wall_clock == doctest::Approx(3.0 + 2.0));
}

TEST_CASE("time model is linear in bytes and flops") {
  const RsuProfile rsu{1e9, 1e9};
  VehicleTrace a = trace(1e9, 8e3, 1);
  VehicleTrace b = a;
  b.model_down_bytes *= 3;
  b.model_up_bytes *= 3;
  for (auto& s : b.steps) {
    s.up_bytes *= 3;
    s.down_bytes *= 3;
  }
  const VehicleTrace one_a[] = {a};
  const VehicleTrace one_b[] = {b};
  CHECK(time_sequential(one_b, rsu).phases.communication ==
        doctest::Approx(3 * time_sequential(one_a, rsu).phases.communication));
}
