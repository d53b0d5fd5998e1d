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

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "asfl/config.hpp"
#include "asfl/data.hpp"
#include "asfl/metrics.hpp"
#include "asfl/orchestrator.hpp"

namespace asfl {

/// Datasets and fleet derived from a config. Independent of the scheme, so every
/// scheme of a sweep sees the same data, partition and initial model.
struct ExperimentSetup {
  Dataset train;
  Dataset test;
  Fleet fleet;
  ParameterSet initial;
};

ExperimentSetup prepare(const RunConfig& cfg);

struct ExperimentResult {
  RunConfig config;
  Evaluation initial;
  std::vector<RoundRecord> records;
  std::vector<double> clocks;         // simulated time at the end of each round
  std::vector<ParameterSet> models;   // global model after each round
  RunSummary summary;
};

/// Called after every round with the new state and its (evaluated) record.
using RoundObserver = std::function<void(const RoundState&, const RoundRecord&)>;

ExperimentResult run_experiment(const RunConfig& cfg, const RoundObserver& observer = {});
ExperimentResult run_experiment(const RunConfig& cfg, const ExperimentSetup& setup, const RoundObserver& observer = {});

/// Metrics CSV text: header plus one row per round.
std::string metrics_csv(const ExperimentResult& result);

struct OutputFiles {
  std::filesystem::path metrics;
  std::filesystem::path summary;
};

/// Writes metrics_<scheme>.csv and summary_<scheme>.json into `dir`, creating it.
OutputFiles write_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

/// Runs `cfg` once per scheme token (cut from the token replaces any cut in cfg).
std::vector<ExperimentResult> sweep(const RunConfig& cfg, std::span<const std::string> schemes);

/// `cfg` with another scheme applied.
RunConfig with_scheme(const RunConfig& cfg, const SchemeToken& token);

}  // namespace asfl
