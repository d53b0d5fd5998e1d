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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "asfl/model.hpp"
#include "asfl/netsim.hpp"
#include "asfl/orchestrator.hpp"

namespace asfl {

enum class Scheme { CL, FL, SL, SFL, ASFL };

std::string to_string(Scheme scheme);

/// A scheme token as used on the command line: cl, fl, sl, slN, sfl, sflN, asfl.
/// The numeric suffix is the cut.
struct SchemeToken {
  Scheme scheme = Scheme::FL;
  std::optional<std::size_t> cut;

  /// Canonical spelling; sl at its default cut prints as "sl".
  std::string str() const;
  bool operator==(const SchemeToken&) const = default;
};

/// Throws ConfigError("scheme", ...) on anything else.
SchemeToken parse_scheme(const std::string& token);

/// Deepest cut select_cut can return.
inline constexpr std::size_t kAdaptiveMinLayers = 8;

/// Throws ConfigError("model", ...) when asfl is asked to run on a model too shallow for its cuts.
void check_scheme_fits(const SchemeToken& scheme, const ModelSpec& model);

struct DatasetConfig {
  std::string source = "synth";  // "synth" or "csv"
  std::filesystem::path path;    // csv only
  std::size_t num_classes = 10;
  std::size_t per_class = 200;  // synth only
  double noise = 0.3;           // synth only
};

struct PartitionConfig {
  bool iid = true;
  std::size_t labels_per_vehicle = 6;
  double power_alpha = 1.0;
};

/// Either a homogeneous fleet described by shared values (mean rates cycled over
/// vehicles) or an explicit per-vehicle list.
struct FleetConfig {
  double compute_capacity = 1e9;
  std::vector<double> mean_rates{4.5e7, 9e7, 1.8e8, 3.6e8};
  double jitter = 0.1;
  double dwell_time = kInfiniteDwell;
  std::vector<VehicleProfile> vehicles;
};

struct RunConfig {
  SchemeToken scheme;
  std::string model_name = "resmini";  // "inline" for a spec given in the file
  ModelSpec model;
  DatasetConfig dataset;
  double test_fraction = 0.2;
  PartitionConfig partition;
  std::size_t n_vehicles = 4;
  std::size_t rounds = 10;
  std::size_t local_epochs = 5;
  std::size_t batch_size = 16;
  double lr = 1e-4;
  SelectionThresholds thresholds{5e7, 1e8, 2e8, 4e8};
  AggregationMode aggregation = AggregationMode::FedAvgMean;
  FleetConfig fleet;
  RsuProfile rsu{2e10, 1e10};
  std::uint64_t seed = 0;
  std::filesystem::path output;  // empty: caller decides

  /// Cut used by sl and sfl; sl defaults to 1.
  CutIndex cut() const;
  std::vector<VehicleProfile> vehicle_profiles() const;
  TrainOptions train_options() const;
};

/// Dotted key path and raw value, e.g. {"fleet.jitter", "0"}. The value is read as
/// JSON when it parses and as a string otherwise.
using Override = std::pair<std::string, std::string>;

/// Resolves a config from JSON text plus overrides (overrides win, then the file,
/// then defaults) and validates it. Errors are ConfigError naming the field.
RunConfig parse_config(const std::string& json_text, std::span<const Override> overrides = {});
RunConfig load_config(const std::filesystem::path& path, std::span<const Override> overrides = {});

/// Fully resolved config as JSON with sorted keys, without the output path.
std::string canonical_json(const RunConfig& cfg);

/// FNV-1a 64 of canonical_json, as 16 hex digits.
std::string fingerprint(const RunConfig& cfg);

std::string model_to_json(const ModelSpec& spec);

}  // namespace asfl
