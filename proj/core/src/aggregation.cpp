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

#include <numeric>
#include <string>

#include "asfl/errors.hpp"
#include "asfl/orchestrator.hpp"

namespace asfl {

std::string to_string(AggregationMode mode) {
  switch (mode) {
    case AggregationMode::FedAvgMean:
      return "fedavg-mean";
    case AggregationMode::PaperLiteral:
      return "paper-literal";
    case AggregationMode::DataWeighted:
      return "data-weighted";
  }
  return "unknown";
}

AggregationMode parse_aggregation(const std::string& name) {
  if (name == "fedavg-mean") return AggregationMode::FedAvgMean;
  if (name == "paper-literal") return AggregationMode::PaperLiteral;
  if (name == "data-weighted") return AggregationMode::DataWeighted;
  throw ConfigError("aggregation", "unknown mode '" + name + "'");
}

ParameterSet aggregate(const ParameterSet& global, std::span<const ParameterSet> models, AggregationMode mode,
                       std::span<const double> weights) {
  if (models.empty()) throw LayoutError("aggregation needs at least one model");
  for (const auto& m : models) {
    if (!m.same_layout(global)) throw LayoutError("model layout does not match the global model");
  }
  const auto n = static_cast<double>(models.size());
  ParameterSet out = ParameterSet::zeros_like(global);
  auto acc = out.values();
  const auto base = global.values();

  switch (mode) {
    case AggregationMode::FedAvgMean: {
      for (const auto& m : models) {
        const auto v = m.values();
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
      }
      for (auto& a : acc) a /= n;
      break;
    }
    case AggregationMode::PaperLiteral: {
      for (const auto& m : models) {
        const auto v = m.values();
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i] - base[i];
      }
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] = base[i] - acc[i] / n;
      break;
    }
    case AggregationMode::DataWeighted: {
      if (weights.size() != models.size()) throw LayoutError("data-weighted aggregation needs one weight per model");
      const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
      if (!(total > 0.0)) throw LayoutError("aggregation weights must sum to a positive value");
      for (std::size_t k = 0; k < models.size(); ++k) {
        const auto v = models[k].values();
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += weights[k] * v[i];
      }
      for (auto& a : acc) a /= total;
      break;
    }
  }
  return out;
}

}  // namespace asfl
