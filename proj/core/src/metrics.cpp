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

#include "asfl/metrics.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "asfl/errors.hpp"
#include "json.hpp"

namespace asfl {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

const std::vector<std::string>& metrics_columns() {
  static const std::vector<std::string> cols{
      "fingerprint",       "scheme",          "round",           "participants",     "dropped",
      "cuts",              "model_down_bytes", "model_up_bytes", "smashed_up_bytes", "labels_up_bytes",
      "gradient_down_bytes", "data_up_bytes", "total_bytes",     "vehicle_bytes",    "vehicle_compute_s",
      "rsu_compute_s",     "communication_s", "wall_clock_s",    "clock_s",          "train_loss",
      "test_loss",         "test_accuracy"};
  return cols;
}

std::string metrics_header() {
  std::string out;
  for (const auto& c : metrics_columns()) {
    if (!out.empty()) out += ',';
    out += c;
  }
  return out;
}

std::string metrics_row(const std::string& fingerprint, const RoundRecord& rec, double clock) {
  std::string cuts;
  std::string vehicle_bytes;
  std::size_t dropped = 0;
  for (const auto& v : rec.vehicles) {
    if (!cuts.empty()) {
      cuts += ';';
      vehicle_bytes += ';';
    }
    cuts += std::to_string(v.cut.value);
    vehicle_bytes += std::to_string(v.bytes.total());
    if (v.dropped) ++dropped;
  }
  const auto& b = rec.bytes;
  std::vector<std::string> f{fingerprint,
                             rec.scheme,
                             std::to_string(rec.round),
                             std::to_string(rec.participants),
                             std::to_string(dropped),
                             cuts,
                             std::to_string(b.model_down),
                             std::to_string(b.model_up),
                             std::to_string(b.smashed_up),
                             std::to_string(b.labels_up),
                             std::to_string(b.gradient_down),
                             std::to_string(b.data_up),
                             std::to_string(b.total()),
                             vehicle_bytes,
                             format_double(rec.seconds.vehicle_compute),
                             format_double(rec.seconds.rsu_compute),
                             format_double(rec.seconds.communication),
                             format_double(rec.wall_clock),
                             format_double(clock),
                             format_double(rec.train_loss),
                             format_double(rec.test_loss),
                             format_double(rec.test_accuracy)};
  std::string out;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (i) out += ',';
    out += f[i];
  }
  return out;
}

RunSummary summarize(const RunConfig& cfg, std::span<const RoundRecord> records, const Evaluation& initial) {
  RunSummary s;
  s.fingerprint = fingerprint(cfg);
  s.scheme = cfg.scheme.str();
  s.rounds = records.size();
  s.initial_loss = initial.loss;
  s.initial_accuracy = initial.accuracy;
  for (const auto& r : records) {
    s.bytes += r.bytes;
    s.wall_clock += r.wall_clock;
    for (const auto& v : r.vehicles) {
      if (v.dropped) ++s.dropped_updates;
    }
  }
  if (!records.empty()) {
    s.final_loss = records.back().test_loss;
    s.final_accuracy = records.back().test_accuracy;
  }
  return s;
}

std::string summary_json(const RunSummary& s, const RunConfig& cfg) {
  nlohmann::json j;
  j["fingerprint"] = s.fingerprint;
  j["scheme"] = s.scheme;
  j["rounds"] = s.rounds;
  j["bytes"] = {{"model_down", s.bytes.model_down}, {"model_up", s.bytes.model_up},
                {"smashed_up", s.bytes.smashed_up}, {"labels_up", s.bytes.labels_up},
                {"gradient_down", s.bytes.gradient_down}, {"data_up", s.bytes.data_up},
                {"total", s.bytes.total()}};
  j["wall_clock_s"] = s.wall_clock;
  j["dropped_updates"] = s.dropped_updates;
  j["initial_test_loss"] = s.initial_loss;
  j["initial_test_accuracy"] = s.initial_accuracy;
  j["final_test_loss"] = s.final_loss;
  j["final_test_accuracy"] = s.final_accuracy;
  j["config"] = nlohmann::json::parse(canonical_json(cfg));
  return j.dump(2) + "\n";
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <class T>
T parse_cell(const std::string& cell, const std::string& path, std::size_t line) {
  T v{};
  auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
    if constexpr (std::is_floating_point_v<T>) {
      if (cell == "nan") return std::nan("");
      if (cell == "inf") return HUGE_VAL;
    }
    throw DataError(path + ":" + std::to_string(line) + ": malformed value '" + cell + "'");
  }
  return v;
}

std::size_t column(const std::string& name) {
  const auto& cols = metrics_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i] == name) return i;
  }
  throw Error("no metrics column " + name);
}

}  // namespace

RunTotals read_metrics(const std::filesystem::path& path) {
  const std::string p = path.string();
  std::ifstream in(path);
  if (!in) throw DataError(p + ": cannot open metrics file");
  std::string line;
  if (!std::getline(in, line) || line != metrics_header()) throw DataError(p + ": not a metrics file (header mismatch)");

  RunTotals t;
  t.path = p;
  const std::size_t width = metrics_columns().size();
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != width) {
      throw DataError(p + ":" + std::to_string(line_no) + ": expected " + std::to_string(width) + " columns, got " +
                      std::to_string(cells.size()));
    }
    if (t.rounds == 0) {
      t.fingerprint = cells[column("fingerprint")];
      t.scheme = cells[column("scheme")];
    } else if (cells[column("fingerprint")] != t.fingerprint) {
      throw DataError(p + ":" + std::to_string(line_no) + ": fingerprint changes within the file");
    }
    ++t.rounds;
    t.bytes += parse_cell<std::uint64_t>(cells[column("total_bytes")], p, line_no);
    t.wall_clock += parse_cell<double>(cells[column("wall_clock_s")], p, line_no);
    t.final_accuracy = parse_cell<double>(cells[column("test_accuracy")], p, line_no);
  }
  return t;
}

double Comparison::ratio(double a, double b) {
  if (a == b) return 1.0;
  return a / b;
}

std::string Comparison::text() const {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-4s %-10s %-16s %7s %16s %14s %10s\n", "#", "scheme", "fingerprint", "rounds",
                "total_bytes", "wall_clock_s", "accuracy");
  out += buf;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    std::snprintf(buf, sizeof buf, "%-4zu %-10s %-16s %7zu %16llu %14.6g %10.4f\n", i, r.scheme.c_str(),
                  r.fingerprint.c_str(), r.rounds, static_cast<unsigned long long>(r.bytes), r.wall_clock,
                  r.final_accuracy);
    out += buf;
  }
  out += "\nratios (row / column): bytes, wall_clock, accuracy\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    for (std::size_t j = 0; j < runs.size(); ++j) {
      if (i == j) continue;
      const auto& a = runs[i];
      const auto& b = runs[j];
      std::snprintf(buf, sizeof buf, "%zu/%zu  %-10s / %-10s  %10.4f %10.4f %10.4f\n", i, j, a.scheme.c_str(),
                    b.scheme.c_str(), ratio(static_cast<double>(a.bytes), static_cast<double>(b.bytes)),
                    ratio(a.wall_clock, b.wall_clock), ratio(a.final_accuracy, b.final_accuracy));
      out += buf;
    }
  }
  for (std::size_t i = 0; i < runs.size(); ++i) out += "[" + std::to_string(i) + "] " + runs[i].path + "\n";
  return out;
}

std::string Comparison::csv() const {
  std::string out = "a,b,a_scheme,b_scheme,bytes_ratio,wall_clock_ratio,accuracy_ratio\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    for (std::size_t j = 0; j < runs.size(); ++j) {
      const auto& a = runs[i];
      const auto& b = runs[j];
      out += a.path + "," + b.path + "," + a.scheme + "," + b.scheme + "," +
             format_double(ratio(static_cast<double>(a.bytes), static_cast<double>(b.bytes))) + "," +
             format_double(ratio(a.wall_clock, b.wall_clock)) + "," +
             format_double(ratio(a.final_accuracy, b.final_accuracy)) + "\n";
    }
  }
  return out;
}

Comparison compare(std::span<const std::filesystem::path> paths) {
  if (paths.size() < 2) throw DataError("compare needs at least two metrics files");
  Comparison c;
  for (const auto& p : paths) c.runs.push_back(read_metrics(p));
  return c;
}

}  // namespace asfl
