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
#include <string>
#include <utility>
#include <vector>

#include "asfl/data.hpp"
#include "asfl/model.hpp"
#include "asfl/netsim.hpp"
#include "asfl/split.hpp"
#include "asfl/timing.hpp"

namespace asfl {

// ---------------------------------------------------------------------------
// Cut selection
// ---------------------------------------------------------------------------

/// Rate thresholds in bits/s, 0 < r1 <= r2 <= r3 <= r4.
struct SelectionThresholds {
  double r1 = 0.0;
  double r2 = 0.0;
  double r3 = 0.0;
  double r4 = 0.0;
};

/// Throws ConfigError("thresholds", ...) when the ordering is violated.
void check_thresholds(const SelectionThresholds& thr);

/// Piecewise rule on right-closed bands: (0,r1] -> 8, (r1,r2] -> 6, (r2,r3] -> 4,
/// (r3,r4] -> 2. Rates above r4 stay at 2.
CutIndex select_cut(double rate, const SelectionThresholds& thr);
CutIndex select_cut(const ChannelSample& sample, const SelectionThresholds& thr);

/// Cut per vehicle, indexed by vehicle id.
struct CutAssignment {
  std::vector<CutIndex> cuts;

  static CutAssignment uniform(std::size_t vehicles, CutIndex cut) { return {std::vector<CutIndex>(vehicles, cut)}; }
  bool operator==(const CutAssignment&) const = default;
};

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

enum class AggregationMode {
  FedAvgMean,    // (1/N) sum_n w_n
  PaperLiteral,  // w_t - (1/N) sum_n (w_n - w_t), exactly as printed
  DataWeighted,  // sum_n |D_n| w_n / sum_n |D_n|
};

std::string to_string(AggregationMode mode);
/// "fedavg-mean", "paper-literal", "data-weighted"; throws ConfigError otherwise.
AggregationMode parse_aggregation(const std::string& name);

/// Combines whole models into the next global model. `weights` (sample counts) are
/// only read in DataWeighted mode. Models are combined in the given order.
ParameterSet aggregate(const ParameterSet& global, std::span<const ParameterSet> models, AggregationMode mode,
                       std::span<const double> weights = {});

// ---------------------------------------------------------------------------
// Rounds
// ---------------------------------------------------------------------------

struct TrainOptions {
  std::size_t local_epochs = 5;
  std::size_t batch_size = 16;
  double lr = 1e-4;
  AggregationMode aggregation = AggregationMode::FedAvgMean;
};

/// Vehicle i has profile vehicles[i] and data partition.vehicles[i].
struct Fleet {
  std::vector<VehicleProfile> vehicles;
  Partition partition;
};

struct RoundContext {
  const ModelSpec& spec;
  const Dataset& train;
  const Fleet& fleet;
  RsuProfile rsu;
  TrainOptions options;
  std::uint64_t seed = 0;
};

struct RoundState {
  std::size_t round = 0;
  ParameterSet global;
  double clock = 0.0;  // simulated seconds since the experiment started
};

enum class MessageKind { ModelDown, ModelUp, SmashedUp, LabelsUp, GradientDown, DataUp };

struct Message {
  std::size_t vehicle = 0;
  MessageKind kind = MessageKind::ModelDown;
  std::uint64_t bytes = 0;
};

struct ByteCounts {
  std::uint64_t model_down = 0;
  std::uint64_t model_up = 0;
  std::uint64_t smashed_up = 0;
  std::uint64_t labels_up = 0;
  std::uint64_t gradient_down = 0;
  std::uint64_t data_up = 0;

  std::uint64_t total() const noexcept {
    return model_down + model_up + smashed_up + labels_up + gradient_down + data_up;
  }
  void add(const Message& m) noexcept;
  ByteCounts& operator+=(const ByteCounts& o) noexcept;
  bool operator==(const ByteCounts&) const = default;
};

struct VehicleRoundRecord {
  std::size_t vehicle = 0;
  CutIndex cut;
  double rate = 0.0;
  std::size_t samples = 0;
  std::size_t steps = 0;
  ByteCounts bytes;
  double finish = 0.0;  // offset from round start
  bool dropped = false;
};

struct RoundRecord {
  std::size_t round = 0;
  std::string scheme;
  std::vector<VehicleRoundRecord> vehicles;
  std::vector<Message> messages;
  ByteCounts bytes;  // sum over messages
  PhaseSeconds seconds;
  double wall_clock = 0.0;
  std::size_t participants = 0;  // vehicles whose update reached the global model
  double train_loss = 0.0;
  double test_loss = 0.0;
  double test_accuracy = 0.0;
};

/// Per-round transmission rate of every vehicle.
std::vector<ChannelSample> round_rates(const RoundContext& ctx, std::size_t round);

/// ASFL assignment: select_cut on every vehicle's rate for this round.
CutAssignment adaptive_cuts(const RoundContext& ctx, std::size_t round, const SelectionThresholds& thr);

/// Each vehicle downloads the full model, runs local epochs of SGD, uploads; models are aggregated.
std::pair<RoundState, RoundRecord> run_round_fl(const RoundState& state, const RoundContext& ctx);

/// Vehicles train one after another on a single split model; the vehicle-side model
/// is relayed through the RSU between vehicles and one RSU-side model is shared.
std::pair<RoundState, RoundRecord> run_round_sl(const RoundState& state, const RoundContext& ctx, CutIndex cut);

/// Split federated round. Every vehicle trains its vehicle-side model against its own
/// RSU-side replica (one smashed/gradient exchange per batch); merged whole models are
/// aggregated. A uniform assignment is plain SFL, a rate-driven one is ASFL.
std::pair<RoundState, RoundRecord> run_round_sfl(const RoundState& state, const RoundContext& ctx,
                                                 const CutAssignment& cuts);

/// Raw data is uploaded once (round 0) and the RSU trains on the pooled partitions.
std::pair<RoundState, RoundRecord> run_round_cl(const RoundState& state, const RoundContext& ctx);

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};

/// Mean cross-entropy and argmax accuracy (first maximum wins ties). Throws DataError on an empty set.
Evaluation evaluate(const ModelSpec& spec, const ParameterSet& params, const Dataset& test);

}  // namespace asfl
