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

#include "asfl/experiment.hpp"

#include <fstream>

#include "asfl/errors.hpp"
#include "asfl/random.hpp"

namespace asfl {

namespace {

enum SeedStream : std::uint64_t { kDataSeed = 1, kSplitSeed = 2, kPartitionSeed = 3, kInitSeed = 4 };

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace

ExperimentSetup prepare(const RunConfig& cfg) {
  ExperimentSetup s;
  Dataset all = cfg.dataset.source == "csv"
                    ? load_csv(cfg.dataset.path, cfg.model.input_shape, cfg.dataset.num_classes)
                    : synth_dataset(cfg.dataset.num_classes, cfg.dataset.per_class, cfg.model.input_shape,
                                    mix_seed({cfg.seed, kDataSeed}), cfg.dataset.noise);
  auto tt = train_test_split(all, cfg.test_fraction, mix_seed({cfg.seed, kSplitSeed}));
  s.train = std::move(tt.train);
  s.test = std::move(tt.test);
  const auto pseed = mix_seed({cfg.seed, kPartitionSeed});
  s.fleet.partition = cfg.partition.iid ? partition_iid(s.train, cfg.n_vehicles, pseed)
                                        : partition_noniid(s.train, cfg.n_vehicles, cfg.partition.labels_per_vehicle,
                                                           cfg.partition.power_alpha, pseed);
  s.fleet.vehicles = cfg.vehicle_profiles();
  s.initial = build_model(cfg.model, mix_seed({cfg.seed, kInitSeed}));
  return s;
}

ExperimentResult run_experiment(const RunConfig& cfg, const RoundObserver& observer) {
  return run_experiment(cfg, prepare(cfg), observer);
}

ExperimentResult run_experiment(const RunConfig& cfg, const ExperimentSetup& setup, const RoundObserver& observer) {
  ExperimentResult res;
  res.config = cfg;
  const RoundContext ctx{cfg.model, setup.train, setup.fleet, cfg.rsu, cfg.train_options(), cfg.seed};
  RoundState state{0, setup.initial, 0.0};
  res.initial = evaluate(cfg.model, state.global, setup.test);

  for (std::size_t t = 0; t < cfg.rounds; ++t) {
    std::pair<RoundState, RoundRecord> out;
    switch (cfg.scheme.scheme) {
      case Scheme::CL:
        out = run_round_cl(state, ctx);
        break;
      case Scheme::FL:
        out = run_round_fl(state, ctx);
        break;
      case Scheme::SL:
        out = run_round_sl(state, ctx, cfg.cut());
        break;
      case Scheme::SFL:
        out = run_round_sfl(state, ctx, CutAssignment::uniform(setup.fleet.vehicles.size(), cfg.cut()));
        break;
      case Scheme::ASFL:
        out = run_round_sfl(state, ctx, adaptive_cuts(ctx, state.round, cfg.thresholds));
        break;
    }
    auto& [next, rec] = out;
    rec.scheme = cfg.scheme.str();
    const auto ev = evaluate(cfg.model, next.global, setup.test);
    rec.test_loss = ev.loss;
    rec.test_accuracy = ev.accuracy;
    if (observer) observer(next, rec);
    state = std::move(next);
    res.clocks.push_back(state.clock);
    res.models.push_back(state.global);
    res.records.push_back(std::move(rec));
  }
  res.summary = summarize(cfg, res.records, res.initial);
  return res;
}

std::string metrics_csv(const ExperimentResult& result) {
  const auto fp = result.summary.fingerprint;
  std::string out = metrics_header() + "\n";
  for (std::size_t i = 0; i < result.records.size(); ++i) {
    out += metrics_row(fp, result.records[i], result.clocks[i]) + "\n";
  }
  return out;
}

OutputFiles write_outputs(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());
  const auto token = result.config.scheme.str();
  OutputFiles files{dir / ("metrics_" + token + ".csv"), dir / ("summary_" + token + ".json")};
  write_file(files.metrics, metrics_csv(result));
  write_file(files.summary, summary_json(result.summary, result.config));
  return files;
}

RunConfig with_scheme(const RunConfig& cfg, const SchemeToken& token) {
  RunConfig out = cfg;
  out.scheme = token;
  if (token.scheme == Scheme::SL && !token.cut) out.scheme.cut = 1;
  if (token.scheme == Scheme::SFL && !token.cut) {
    if (!cfg.scheme.cut) throw ConfigError("scheme", "sfl needs a cut (use sflN)");
    out.scheme.cut = cfg.scheme.cut;
  }
  check_scheme_fits(out.scheme, out.model);
  if (out.scheme.cut) {
    try {
      check_cut(out.model, CutIndex{*out.scheme.cut});
    } catch (const Error& e) {
      throw ConfigError("scheme", e.what());
    }
  }
  return out;
}

std::vector<ExperimentResult> sweep(const RunConfig& cfg, std::span<const std::string> schemes) {
  if (schemes.empty()) throw ConfigError("schemes", "at least one scheme is required");
  std::vector<RunConfig> configs;
  for (const auto& s : schemes) configs.push_back(with_scheme(cfg, parse_scheme(s)));
  const auto setup = prepare(cfg);
  std::vector<ExperimentResult> out;
  for (const auto& c : configs) out.push_back(run_experiment(c, setup));
  return out;
}

}  // namespace asfl
