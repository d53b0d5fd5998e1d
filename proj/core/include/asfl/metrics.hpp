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

#include "asfl/config.hpp"
#include "asfl/orchestrator.hpp"

namespace asfl {

/// Shortest round-trip decimal form; "inf"/"nan" for non-finite values.
std::string format_double(double v);

/// Column names of the per-round metrics CSV.
const std::vector<std::string>& metrics_columns();
std::string metrics_header();
/// One CSV line (no newline). `clock` is the simulated time at the end of the round.
std::string metrics_row(const std::string& fingerprint, const RoundRecord& rec, double clock);

struct RunSummary {
  std::string fingerprint;
  std::string scheme;
  std::size_t rounds = 0;
  ByteCounts bytes;
  double wall_clock = 0.0;
  std::size_t dropped_updates = 0;
  double initial_loss = 0.0;
  double initial_accuracy = 0.0;
  double final_loss = 0.0;  // zero when no round ran
  double final_accuracy = 0.0;
};

RunSummary summarize(const RunConfig& cfg, std::span<const RoundRecord> records, const Evaluation& initial);

/// Summary plus the canonical config, pretty-printed with sorted keys.
std::string summary_json(const RunSummary& summary, const RunConfig& cfg);

/// Totals recovered from a metrics CSV.
struct RunTotals {
  std::string path;
  std::string fingerprint;
  std::string scheme;
  std::size_t rounds = 0;
  std::uint64_t bytes = 0;
  double wall_clock = 0.0;
  double final_accuracy = 0.0;
};

/// Throws DataError naming the path when the file is missing or its header differs.
RunTotals read_metrics(const std::filesystem::path& path);

struct Comparison {
  std::vector<RunTotals> runs;

  /// a / b, except that equal values give exactly 1.
  static double ratio(double a, double b);

  std::string text() const;
  /// One line per ordered pair (i != j) plus i == j.
  std::string csv() const;
};

/// Needs at least two files.
Comparison compare(std::span<const std::filesystem::path> paths);

}  // namespace asfl
