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

#include "asfl/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "asfl/errors.hpp"
#include "asfl/random.hpp"

namespace asfl {

namespace {

constexpr std::uint64_t kIidStream = 0x11d;
constexpr std::uint64_t kNonIidStream = 0x4e11d;
constexpr std::uint64_t kSynthStream = 0x5947;
constexpr std::uint64_t kSplitStream = 0x5e1;

double parse_double(std::string_view field, std::size_t line) {
  double v = 0.0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw DataError("line " + std::to_string(line) + ": '" + std::string(field) + "' is not a number");
  }
  return v;
}

std::vector<std::string_view> split_fields(std::string_view row) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = row.find(',', start);
    out.push_back(row.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void append_double(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

}  // namespace

void check_dataset(const Dataset& ds) {
  if (ds.samples.shape().rank() < 2 || ds.samples.shape()[0] != ds.labels.size()) {
    throw DataError("dataset has " + std::to_string(ds.labels.size()) + " labels but samples of shape " +
                    ds.samples.shape().str());
  }
  for (int label : ds.labels) {
    if (label < 0 || static_cast<std::size_t>(label) >= ds.num_classes) {
      throw DataError("label " + std::to_string(label) + " outside [0, " + std::to_string(ds.num_classes) + ")");
    }
  }
}

std::size_t Partition::total() const noexcept {
  std::size_t n = 0;
  for (const auto& v : vehicles) n += v.size();
  return n;
}

void check_partition(const Partition& partition, std::size_t dataset_size) {
  std::vector<bool> seen(dataset_size, false);
  for (std::size_t v = 0; v < partition.vehicles.size(); ++v) {
    if (partition.vehicles[v].empty()) throw DataError("vehicle " + std::to_string(v) + " has no samples");
    for (auto idx : partition.vehicles[v]) {
      if (idx >= dataset_size) throw DataError("index " + std::to_string(idx) + " out of dataset bounds");
      if (seen[idx]) throw DataError("index " + std::to_string(idx) + " assigned twice");
      seen[idx] = true;
    }
  }
}

Dataset load_csv(const std::filesystem::path& path, const TensorShape& sample_shape, std::size_t num_classes) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  const std::size_t pixels = sample_shape.numel();
  std::vector<double> values;
  std::vector<int> labels;
  std::string row;
  std::size_t line = 0;
  while (std::getline(in, row)) {
    ++line;
    if (!row.empty() && row.back() == '\r') row.pop_back();
    if (row.empty()) continue;
    const auto fields = split_fields(row);
    if (fields.size() != pixels + 1) {
      throw DataError(path.string() + " line " + std::to_string(line) + ": expected " + std::to_string(pixels + 1) +
                      " fields, got " + std::to_string(fields.size()));
    }
    const double label = parse_double(fields[0], line);
    if (label != std::floor(label) || label < 0 || label >= static_cast<double>(num_classes)) {
      throw DataError(path.string() + " line " + std::to_string(line) + ": label " + std::string(fields[0]) +
                      " outside [0, " + std::to_string(num_classes) + ")");
    }
    labels.push_back(static_cast<int>(label));
    for (std::size_t i = 1; i < fields.size(); ++i) {
      const double v = parse_double(fields[i], line);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw DataError(path.string() + " line " + std::to_string(line) + ": pixel value " +
                        std::string(fields[i]) + " outside [0, 1]");
      }
      values.push_back(v);
    }
  }
  if (labels.empty()) throw DataError(path.string() + " contains no samples");
  Dataset ds;
  ds.samples = Tensor(sample_shape.with_batch(labels.size()), std::move(values));
  ds.labels = std::move(labels);
  ds.num_classes = num_classes;
  return ds;
}

void write_csv(const Dataset& ds, const std::filesystem::path& path) {
  check_dataset(ds);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  const std::size_t pixels = ds.sample_shape().numel();
  std::string row;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    row = std::to_string(ds.labels[i]);
    for (std::size_t p = 0; p < pixels; ++p) {
      row += ',';
      append_double(row, ds.samples[i * pixels + p]);
    }
    row += '\n';
    out << row;
  }
}

Dataset synth_dataset(std::size_t num_classes, std::size_t per_class, const TensorShape& sample_shape,
                      std::uint64_t seed, double noise) {
  if (num_classes == 0 || per_class == 0) throw DataError("synthetic dataset needs positive sizes");
  auto rng = make_rng({seed, kSynthStream});
  const std::size_t pixels = sample_shape.numel();
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, noise);

  std::vector<double> templates(num_classes * pixels);
  for (auto& t : templates) t = uniform(rng);

  const std::size_t n = num_classes * per_class;
  std::vector<double> values(n * pixels);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t cls = i % num_classes;
    labels[i] = static_cast<int>(cls);
    const double* tpl = templates.data() + cls * pixels;
    double* dst = values.data() + i * pixels;
    for (std::size_t p = 0; p < pixels; ++p) dst[p] = std::clamp(tpl[p] + gauss(rng), 0.0, 1.0);
  }
  Dataset ds;
  ds.samples = Tensor(sample_shape.with_batch(n), std::move(values));
  ds.labels = std::move(labels);
  ds.num_classes = num_classes;
  return ds;
}

Dataset subset(const Dataset& ds, std::span<const std::size_t> indices) {
  if (indices.empty()) throw DataError("empty subset");
  const std::size_t pixels = ds.sample_shape().numel();
  std::vector<double> values(indices.size() * pixels);
  std::vector<int> labels(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto idx = indices[i];
    if (idx >= ds.size()) throw DataError("index " + std::to_string(idx) + " out of dataset bounds");
    std::copy_n(ds.samples.data() + idx * pixels, pixels, values.data() + i * pixels);
    labels[i] = ds.labels[idx];
  }
  Dataset out;
  out.samples = Tensor(ds.sample_shape().with_batch(indices.size()), std::move(values));
  out.labels = std::move(labels);
  out.num_classes = ds.num_classes;
  return out;
}

Batch gather(const Dataset& ds, std::span<const std::size_t> indices) {
  Dataset picked = subset(ds, indices);
  return Batch{std::move(picked.samples), std::move(picked.labels)};
}

TrainTest train_test_split(const Dataset& ds, double test_fraction, std::uint64_t seed) {
  check_dataset(ds);
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw DataError("test fraction must lie in (0, 1)");
  auto rng = make_rng({seed, kSplitStream});
  std::vector<std::vector<std::size_t>> by_class(ds.num_classes);
  for (std::size_t i = 0; i < ds.size(); ++i) by_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);

  std::vector<std::size_t> train, test;
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(members.size())));
    test.insert(test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_test));
    train.insert(train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test), members.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  if (train.empty() || test.empty()) throw DataError("dataset too small for a train/test split");
  return TrainTest{subset(ds, train), subset(ds, test)};
}

Partition partition_iid(const Dataset& ds, std::size_t n_vehicles, std::uint64_t seed) {
  if (ds.size() == 0) throw DataError("cannot partition an empty dataset");
  if (n_vehicles == 0) throw DataError("need at least one vehicle");
  if (ds.size() < n_vehicles) {
    throw DataError(std::to_string(ds.size()) + " samples cannot cover " + std::to_string(n_vehicles) + " vehicles");
  }
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto rng = make_rng({seed, kIidStream});
  std::shuffle(order.begin(), order.end(), rng);

  Partition p;
  p.vehicles.resize(n_vehicles);
  const std::size_t base = ds.size() / n_vehicles, extra = ds.size() % n_vehicles;
  std::size_t cursor = 0;
  for (std::size_t v = 0; v < n_vehicles; ++v) {
    const std::size_t n = base + (v < extra ? 1 : 0);
    p.vehicles[v].assign(order.begin() + static_cast<std::ptrdiff_t>(cursor),
                         order.begin() + static_cast<std::ptrdiff_t>(cursor + n));
    cursor += n;
  }
  return p;
}

namespace {

// Repairs coverage deterministically: each missing label replaces, in some vehicle,
// a label that is held by more than one vehicle.
void cover_all_labels(std::vector<std::vector<int>>& sets, const std::vector<int>& available) {
  for (int label : available) {
    std::size_t holders = 0;
    for (const auto& s : sets) holders += static_cast<std::size_t>(std::count(s.begin(), s.end(), label));
    if (holders > 0) continue;
    bool placed = false;
    for (std::size_t v = 0; v < sets.size() && !placed; ++v) {
      for (auto& held : sets[v]) {
        std::size_t count = 0;
        for (const auto& s : sets) count += static_cast<std::size_t>(std::count(s.begin(), s.end(), held));
        if (count > 1) {
          held = label;
          placed = true;
          break;
        }
      }
    }
  }
}

}  // namespace

Partition partition_noniid(const Dataset& ds, std::size_t n_vehicles, std::size_t labels_per_vehicle,
                           double power_alpha, std::uint64_t seed) {
  check_dataset(ds);
  if (n_vehicles == 0) throw DataError("need at least one vehicle");
  if (labels_per_vehicle == 0 || labels_per_vehicle > ds.num_classes) {
    throw DataError("labels_per_vehicle must lie in [1, " + std::to_string(ds.num_classes) + "]");
  }
  if (!(power_alpha >= 0.0)) throw DataError("power_alpha must be non-negative");

  auto rng = make_rng({seed, kNonIidStream});
  std::vector<std::vector<std::size_t>> pools(ds.num_classes);
  for (std::size_t i = 0; i < ds.size(); ++i) pools[static_cast<std::size_t>(ds.labels[i])].push_back(i);
  std::vector<int> available;
  for (std::size_t c = 0; c < pools.size(); ++c) {
    if (!pools[c].empty()) available.push_back(static_cast<int>(c));
  }
  if (available.size() < labels_per_vehicle) {
    throw DataError("only " + std::to_string(available.size()) + " labels present, " +
                    std::to_string(labels_per_vehicle) + " requested per vehicle");
  }
  for (auto& pool : pools) std::shuffle(pool.begin(), pool.end(), rng);

  // label subsets, in draw order
  const bool coverable = n_vehicles * labels_per_vehicle >= available.size();
  std::vector<std::vector<int>> sets(n_vehicles);
  constexpr int kAttempts = 256;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    for (auto& s : sets) {
      std::vector<int> shuffled = available;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      s.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(labels_per_vehicle));
    }
    if (!coverable) break;
    std::vector<bool> held(ds.num_classes, false);
    for (const auto& s : sets) {
      for (int l : s) held[static_cast<std::size_t>(l)] = true;
    }
    if (std::all_of(available.begin(), available.end(), [&](int l) { return held[static_cast<std::size_t>(l)]; })) break;
    if (attempt + 1 == kAttempts) cover_all_labels(sets, available);
  }

  std::vector<double> weights(n_vehicles);
  for (std::size_t v = 0; v < n_vehicles; ++v) weights[v] = std::pow(static_cast<double>(v + 1), -power_alpha);
  const double weight_sum = std::accumulate(weights.begin(), weights.end(), 0.0);

  // largest total S such that every label pool can serve its holders' per-label shares
  double bound = std::numeric_limits<double>::infinity();
  for (int l : available) {
    double share = 0.0;
    for (std::size_t v = 0; v < n_vehicles; ++v) {
      if (std::find(sets[v].begin(), sets[v].end(), l) != sets[v].end()) {
        share += weights[v] / weight_sum / static_cast<double>(labels_per_vehicle);
      }
    }
    if (share > 0.0) bound = std::min(bound, static_cast<double>(pools[static_cast<std::size_t>(l)].size()) / share);
  }

  auto demands_for = [&](std::size_t total, std::vector<std::size_t>& sizes,
                         std::vector<std::vector<std::size_t>>& per_label) {
    std::vector<std::size_t> used(ds.num_classes, 0);
    for (std::size_t v = 0; v < n_vehicles; ++v) {
      sizes[v] = static_cast<std::size_t>(std::floor(static_cast<double>(total) * weights[v] / weight_sum));
      per_label[v].assign(labels_per_vehicle, sizes[v] / labels_per_vehicle);
      for (std::size_t j = 0; j < sizes[v] % labels_per_vehicle; ++j) ++per_label[v][j];
      for (std::size_t j = 0; j < labels_per_vehicle; ++j) used[static_cast<std::size_t>(sets[v][j])] += per_label[v][j];
    }
    for (std::size_t c = 0; c < ds.num_classes; ++c) {
      if (used[c] > pools[c].size()) return false;
    }
    return true;
  };

  std::vector<std::size_t> sizes(n_vehicles);
  std::vector<std::vector<std::size_t>> per_label(n_vehicles);
  auto total = static_cast<std::size_t>(std::floor(std::min(bound, static_cast<double>(ds.size()))));
  while (total > 0 && !demands_for(total, sizes, per_label)) --total;
  for (std::size_t v = 0; v < n_vehicles; ++v) {
    if (sizes[v] < labels_per_vehicle) {
      throw DataError("not enough samples in the chosen labels: vehicle " + std::to_string(v) + " would get " +
                      std::to_string(sizes[v]) + " samples for " + std::to_string(labels_per_vehicle) + " labels");
    }
  }

  Partition p;
  p.vehicles.resize(n_vehicles);
  std::vector<std::size_t> cursor(ds.num_classes, 0);
  for (std::size_t v = 0; v < n_vehicles; ++v) {
    for (std::size_t j = 0; j < labels_per_vehicle; ++j) {
      const auto l = static_cast<std::size_t>(sets[v][j]);
      for (std::size_t k = 0; k < per_label[v][j]; ++k) p.vehicles[v].push_back(pools[l][cursor[l]++]);
    }
    std::shuffle(p.vehicles[v].begin(), p.vehicles[v].end(), rng);
    std::sort(sets[v].begin(), sets[v].end());
  }
  p.label_sets = std::move(sets);
  return p;
}

std::vector<std::size_t> label_histogram(const Dataset& ds, std::span<const std::size_t> indices) {
  std::vector<std::size_t> hist(ds.num_classes, 0);
  for (auto idx : indices) ++hist.at(static_cast<std::size_t>(ds.labels.at(idx)));
  return hist;
}

std::string partition_to_json(const Partition& partition) {
  nlohmann::ordered_json doc;
  auto& vehicles = doc["vehicles"] = nlohmann::ordered_json::object();
  for (std::size_t v = 0; v < partition.vehicles.size(); ++v) vehicles[std::to_string(v)] = partition.vehicles[v];
  if (!partition.label_sets.empty()) {
    auto& sets = doc["label_sets"] = nlohmann::ordered_json::object();
    for (std::size_t v = 0; v < partition.label_sets.size(); ++v) sets[std::to_string(v)] = partition.label_sets[v];
  }
  return doc.dump(2);
}

Partition partition_from_json(const std::string& text) {
  Partition p;
  try {
    const auto doc = nlohmann::json::parse(text);
    const auto& vehicles = doc.at("vehicles");
    p.vehicles.resize(vehicles.size());
    for (std::size_t v = 0; v < vehicles.size(); ++v) {
      p.vehicles[v] = vehicles.at(std::to_string(v)).get<std::vector<std::size_t>>();
    }
    if (doc.contains("label_sets")) {
      const auto& sets = doc.at("label_sets");
      p.label_sets.resize(sets.size());
      for (std::size_t v = 0; v < sets.size(); ++v) p.label_sets[v] = sets.at(std::to_string(v)).get<std::vector<int>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed partition JSON: ") + e.what());
  }
  return p;
}

}  // namespace asfl
