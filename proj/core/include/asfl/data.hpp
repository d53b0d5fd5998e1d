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
#include <span>
#include <string>
#include <vector>

#include "asfl/model.hpp"

namespace asfl {

struct Dataset {
  Tensor samples;           // [N, ...sample shape]
  std::vector<int> labels;  // N entries
  std::size_t num_classes = 0;

  std::size_t size() const noexcept { return labels.size(); }
  TensorShape sample_shape() const { return samples.shape().sample(); }
};

/// Throws DataError if sample and label counts differ or a label is out of range.
void check_dataset(const Dataset& ds);

/// Per-vehicle index lists into a Dataset. Position in `vehicles` is the vehicle id.
struct Partition {
  std::vector<std::vector<std::size_t>> vehicles;
  /// Label subset per vehicle for label-skewed partitions; empty for IID.
  std::vector<std::vector<int>> label_sets;

  std::size_t size() const noexcept { return vehicles.size(); }
  std::size_t total() const noexcept;
};

/// Disjoint, in-bounds, every list nonempty.
void check_partition(const Partition& partition, std::size_t dataset_size);

/// One sample per row: `label,pix0,pix1,...` with pixels in [0, 1].
Dataset load_csv(const std::filesystem::path& path, const TensorShape& sample_shape, std::size_t num_classes);
void write_csv(const Dataset& ds, const std::filesystem::path& path);

/// Class k is a fixed uniform-random template plus N(0, noise^2) pixel noise, clipped to [0, 1].
/// Samples are interleaved by class: index i has label i % num_classes.
Dataset synth_dataset(std::size_t num_classes, std::size_t per_class, const TensorShape& sample_shape,
                      std::uint64_t seed, double noise = 0.3);

/// Stratified split; the test side takes round(fraction * class count) samples of every class.
struct TrainTest {
  Dataset train;
  Dataset test;
};
TrainTest train_test_split(const Dataset& ds, double test_fraction, std::uint64_t seed);

Dataset subset(const Dataset& ds, std::span<const std::size_t> indices);
Batch gather(const Dataset& ds, std::span<const std::size_t> indices);

Partition partition_iid(const Dataset& ds, std::size_t n_vehicles, std::uint64_t seed);

/// Label-skewed partition. Every vehicle holds exactly `labels_per_vehicle` distinct labels,
/// drawn uniformly per vehicle (redrawn until every label is held when n * k allows it).
/// Vehicle n receives a share proportional to (n + 1)^-power_alpha of the largest pool that
/// the label supplies can serve, split evenly over its labels.
Partition partition_noniid(const Dataset& ds, std::size_t n_vehicles, std::size_t labels_per_vehicle,
                           double power_alpha, std::uint64_t seed);

std::vector<std::size_t> label_histogram(const Dataset& ds, std::span<const std::size_t> indices);

/// {"vehicles": {"0": [...], "1": [...]}, "label_sets": {...}}
std::string partition_to_json(const Partition& partition);
Partition partition_from_json(const std::string& text);

}  // namespace asfl
