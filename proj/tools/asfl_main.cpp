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

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "asfl/config.hpp"
#include "asfl/errors.hpp"
#include "asfl/experiment.hpp"
#include "asfl/metrics.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

constexpr const char* kOutEnv = "ASFL_OUT_DIR";

std::filesystem::path output_dir(const std::string& flag, const asfl::RunConfig* cfg) {
  if (!flag.empty()) return flag;
  if (cfg && !cfg->output.empty()) return cfg->output;
  if (const char* env = std::getenv(kOutEnv); env && *env) return env;
  return "asfl_out";
}

std::vector<asfl::Override> parse_sets(const std::vector<std::string>& sets) {
  std::vector<asfl::Override> out;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw asfl::ConfigError("--set", "expected key=value, got '" + s + "'");
    out.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  return out;
}

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> rounds;
  std::optional<std::size_t> vehicles;
  std::optional<double> lr;
  std::vector<std::string> sets;
  bool quiet = false;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "JSON run config")->required()->check(CLI::ExistingFile);
    app->add_option("--out", out, std::string("output directory (default: config 'output', $") + kOutEnv +
                                      ", ./asfl_out)");
    app->add_option("--seed", seed, "experiment seed");
    app->add_option("--rounds", rounds, "global rounds");
    app->add_option("--vehicles", vehicles, "number of vehicles");
    app->add_option("--lr", lr, "learning rate");
    app->add_option("--set", sets, "override any config field, e.g. --set fleet.jitter=0")->take_all();
    app->add_flag("-q,--quiet", quiet, "no per-round progress");
  }

  std::vector<asfl::Override> overrides() const {
    auto o = parse_sets(sets);
    if (seed) o.emplace_back("seed", std::to_string(*seed));
    if (rounds) o.emplace_back("rounds", std::to_string(*rounds));
    if (vehicles) o.emplace_back("n_vehicles", std::to_string(*vehicles));
    if (lr) o.emplace_back("lr", asfl::format_double(*lr));
    return o;
  }
};

asfl::RoundObserver progress(bool quiet) {
  if (quiet) return {};
  return [](const asfl::RoundState& s, const asfl::RoundRecord& r) {
    std::fprintf(stderr, "[%s] round %zu  bytes %llu  wall %.4gs  clock %.4gs  loss %.4f  acc %.4f\n",
                 r.scheme.c_str(), r.round, static_cast<unsigned long long>(r.bytes.total()), r.wall_clock, s.clock,
                 r.train_loss, r.test_accuracy);
  };
}

void report(const asfl::ExperimentResult& res, const asfl::OutputFiles& files) {
  const auto& s = res.summary;
  std::printf("%s: %zu rounds, %llu bytes, %.6g s simulated, accuracy %.4f -> %.4f\n  %s\n  %s\n", s.scheme.c_str(),
              s.rounds, static_cast<unsigned long long>(s.bytes.total()), s.wall_clock, s.initial_accuracy,
              s.final_accuracy, files.metrics.string().c_str(), files.summary.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vehicular split/federated learning simulator"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  std::string run_scheme;
  auto* run = app.add_subcommand("run", "run one experiment");
  run_flags.attach(run);
  run->add_option("--scheme", run_scheme, "cl, fl, sl[N], sfl[N] or asfl (overrides the config)");

  CommonFlags sweep_flags;
  std::vector<std::string> sweep_schemes;
  auto* sw = app.add_subcommand("sweep", "run one experiment per scheme on shared data");
  sweep_flags.attach(sw);
  sw->add_option("--schemes", sweep_schemes, "comma-separated scheme tokens, e.g. fl,sl,sfl2,asfl")
      ->required()
      ->delimiter(',');

  std::vector<std::string> compare_files;
  std::string compare_csv;
  std::string compare_out;
  auto* cmp = app.add_subcommand("compare", "compare metrics CSV files");
  cmp->add_option("files", compare_files, "metrics_*.csv files")->required();
  cmp->add_option("--csv", compare_csv, "where to write the ratio table (default: <out>/comparison.csv)");
  cmp->add_option("--out", compare_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) {
      auto overrides = run_flags.overrides();
      if (!run_scheme.empty()) {
        overrides.emplace_back("scheme", "\"" + run_scheme + "\"");
        overrides.emplace_back("cut", "null");
      }
      const auto cfg = asfl::load_config(run_flags.config, overrides);
      const auto dir = output_dir(run_flags.out, &cfg);
      const auto res = asfl::run_experiment(cfg, progress(run_flags.quiet));
      report(res, asfl::write_outputs(res, dir));
    } else if (*sw) {
      const auto cfg = asfl::load_config(sweep_flags.config, sweep_flags.overrides());
      const auto dir = output_dir(sweep_flags.out, &cfg);
      for (const auto& res : asfl::sweep(cfg, sweep_schemes)) report(res, asfl::write_outputs(res, dir));
    } else if (*cmp) {
      std::vector<std::filesystem::path> paths(compare_files.begin(), compare_files.end());
      const auto c = asfl::compare(paths);
      std::fputs(c.text().c_str(), stdout);
      std::filesystem::path csv = compare_csv;
      if (csv.empty()) {
        const auto dir = output_dir(compare_out, nullptr);
        std::filesystem::create_directories(dir);
        csv = dir / "comparison.csv";
      }
      std::ofstream(csv, std::ios::binary | std::ios::trunc) << c.csv();
      std::printf("ratios written to %s\n", csv.string().c_str());
    }
  } catch (const asfl::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntimeError;
  }
  return kOk;
}
