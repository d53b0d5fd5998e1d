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

#include <string>

#include "asfl/errors.hpp"
#include "asfl/orchestrator.hpp"

namespace asfl {

void check_thresholds(const SelectionThresholds& t) {
  if (!(t.r1 > 0.0)) throw ConfigError("thresholds", "r1 must be positive");
  if (!(t.r1 <= t.r2 && t.r2 <= t.r3 && t.r3 <= t.r4)) {
    throw ConfigError("thresholds", "must satisfy r1 <= r2 <= r3 <= r4, got (" + std::to_string(t.r1) + ", " +
                                        std::to_string(t.r2) + ", " + std::to_string(t.r3) + ", " +
                                        std::to_string(t.r4) + ")");
  }
}

CutIndex select_cut(double rate, const SelectionThresholds& t) {
  if (!(rate > 0.0)) throw RangeError("transmission rate must be positive");
  if (rate <= t.r1) return CutIndex{8};
  if (rate <= t.r2) return CutIndex{6};
  if (rate <= t.r3) return CutIndex{4};
  return CutIndex{2};  // (r3, r4] and, by extension, anything faster
}

CutIndex select_cut(const ChannelSample& sample, const SelectionThresholds& t) { return select_cut(sample.rate, t); }

}  // namespace asfl
