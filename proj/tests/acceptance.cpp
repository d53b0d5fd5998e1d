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

// Acceptance suite. One PASS/FAIL line per criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "asfl/config.hpp"
#include "asfl/errors.hpp"
#include "asfl/experiment.hpp"
#include "asfl/orchestrator.hpp"
#include "asfl/reference_models.hpp"
#include "test_util.hpp"

using namespace asfl;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// 1. split equivalence
Outcome split_equivalence() {
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto spec = test::random_model(rng, test::pick(rng, 2, 5));
    const auto params = build_model(spec, rng());
    const CutIndex cut{test::pick(rng, 0, spec.layer_count())};
    const std::size_t batch = test::pick(rng, 1, 8);
    worst = std::max(worst, test::split_equivalence_error(spec, params, cut, batch, rng));
  }
  return {worst < 1e-6, "200 triples, max rel err " + fmt("%.2e", worst)};
}

// 2. gradient correctness
Outcome gradients() {
  std::mt19937_64 rng(202);
  double worst = 0.0;
  std::string worst_kind;
  for (std::size_t kind = 0; kind < test::kLayerKinds; ++kind) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto lc = test::random_layer(kind, rng);
      const auto fd = test::finite_difference_check(lc, rng);
      const double e = std::max(fd.params, fd.input);
      if (e > worst) {
        worst = e;
        worst_kind = kind_name(lc.kind);
      }
    }
  }
  return {worst < 1e-4, std::to_string(test::kLayerKinds) + " kinds x 20, max rel err " + fmt("%.2e", worst) + " (" +
                            worst_kind + ")"};
}

// Shared world for the communication and latency criteria: resmini on synthetic
// 16x16 data, 250 samples per vehicle, batch 16, 5 local epochs.
struct World {
  ModelSpec spec = resmini();
  Dataset train;
  Fleet fleet;
  RsuProfile rsu{2e10, 1e10};
  TrainOptions options{5, 16, 1e-4, AggregationMode::FedAvgMean};

  RoundContext ctx() const { return {spec, train, fleet, rsu, options, 0}; }
};

World make_world(std::size_t vehicles, std::vector<double> rates, double jitter) {
  World w;
  w.train = synth_dataset(10, 25 * vehicles, w.spec.input_shape, 11, 0.3);
  w.fleet.partition = partition_iid(w.train, vehicles, 12);
  for (std::size_t i = 0; i < vehicles; ++i) {
    w.fleet.vehicles.push_back({i, 1e9, {rates[i % rates.size()], jitter}, kInfiniteDwell});
  }
  return w;
}

// Closed-form bytes of one split round at a uniform cut (cut L is FL).
std::uint64_t closed_form_bytes(const World& w, std::size_t cut) {
  const std::size_t L = w.spec.layer_count();
  std::uint64_t total = 0;
  for (const auto& part : w.fleet.partition.vehicles) {
    total += 2 * param_bytes(w.spec, 0, cut);
    for (std::size_t e = 0; e < w.options.local_epochs; ++e) {
      for (std::size_t s = 0; s < part.size(); s += w.options.batch_size) {
        const std::size_t b = std::min(w.options.batch_size, part.size() - s);
        if (cut < L) total += smashed_bytes(w.spec, CutIndex{cut}, b) + label_bytes(b);
        if (cut > 0 && cut < L) total += gradient_bytes(w.spec, CutIndex{cut}, b);
      }
    }
  }
  return total;
}

// 3. communication-load ordering
Outcome communication_ordering() {
  const auto w = make_world(4, {9e7}, 0.1);
  const RoundState start{0, build_model(w.spec, 3), 0.0};
  struct Row {
    std::string name;
    std::size_t cut;
    RoundRecord rec;
  };
  std::vector<Row> rows;
  rows.push_back({"sl", 1, run_round_sl(start, w.ctx(), CutIndex{1}).second});
  for (std::size_t c : {2, 4, 6, 8}) {
    rows.push_back({"sfl" + std::to_string(c), c,
                    run_round_sfl(start, w.ctx(), CutAssignment::uniform(4, CutIndex{c})).second});
  }
  rows.push_back({"fl", w.spec.layer_count(), run_round_fl(start, w.ctx()).second});

  bool ok = true;
  std::string detail;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto got = rows[i].rec.bytes.total();
    std::uint64_t from_messages = 0;
    for (const auto& m : rows[i].rec.messages) from_messages += m.bytes;
    ok = ok && got == closed_form_bytes(w, rows[i].cut) && got == from_messages;
    if (i > 0) ok = ok && rows[i - 1].rec.bytes.total() > got;
    detail += (i ? " > " : "") + rows[i].name + " " + std::to_string(got);
  }
  return {ok, detail + (ok ? ", closed form exact" : ", MISMATCH")};
}

double r_squared(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double icpt = (sy - slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    ss_res += std::pow(y[i] - (icpt + slope * x[i]), 2);
    ss_tot += std::pow(y[i] - sy / n, 2);
  }
  return 1.0 - ss_res / ss_tot;
}

// Reference profile: defaults of RunConfig (4 identical vehicles, RSU 20x, rates across the four bands).
constexpr const char* kReference = R"({
  "scheme": "fl", "model": "resmini", "dataset": {"per_class": 125}, "rounds": 1
})";

// 4. latency trends
Outcome latency() {
  const auto cfg = parse_config(kReference);
  const auto res = sweep(cfg, std::vector<std::string>{"fl", "sl", "asfl"});
  const double fl = res[0].summary.wall_clock, sl = res[1].summary.wall_clock, asfl = res[2].summary.wall_clock;
  std::string cuts;
  for (const auto& v : res[2].records[0].vehicles) cuts += (cuts.empty() ? "" : ",") + std::to_string(v.cut.value);

  std::vector<double> ns, secs;
  for (std::size_t n : {1, 2, 4, 8}) {
    auto w = make_world(8, {9e7}, 0.1);
    w.fleet.partition.vehicles.resize(n);
    w.fleet.vehicles.resize(n);
    const RoundState start{0, build_model(w.spec, 3), 0.0};
    ns.push_back(static_cast<double>(n));
    secs.push_back(run_round_sl(start, w.ctx(), CutIndex{1}).second.wall_clock);
  }
  const double r2 = r_squared(ns, secs);
  const bool ok = asfl < fl && asfl < sl && r2 > 0.99;
  return {ok, "asfl " + fmt("%.3f", asfl) + "s (cuts " + cuts + ") < fl " + fmt("%.3f", fl) + "s, < sl " +
                  fmt("%.3f", sl) + "s; sl time vs N R^2 " + fmt("%.6f", r2)};
}

// Short runs used for trajectory comparisons and determinism.
constexpr const char* kShort = R"({
  "scheme": "fl", "model": "resmini", "dataset": {"per_class": 30}, "rounds": 3, "local_epochs": 2,
  "lr": 0.05, "seed": 7
})";

bool same_trajectory(const ExperimentResult& a, const ExperimentResult& b) {
  return a.models.size() == b.models.size() && a.models == b.models;
}

// 5. scheme-collapse oracles
Outcome scheme_collapse() {
  const auto base = parse_config(kShort);
  const auto setup = prepare(base);
  const auto fl = run_experiment(base, setup);
  const auto sfl_l = run_experiment(with_scheme(base, parse_scheme("sfl10")), setup);
  bool ok = fl.models.size() == 3 && same_trajectory(fl, sfl_l) && fl.models.back() != setup.initial;
  std::string detail = std::string("sfl10==fl ") + (same_trajectory(fl, sfl_l) ? "yes" : "NO");

  // One constant rate per band; ASFL must reproduce SFL at the mapped cut.
  for (double rate : {4e7, 9e7, 1.5e8, 3e8, 5e8}) {
    const std::vector<Override> ov{{"fleet.mean_rates", "[" + fmt("%.17g", rate) + "]"}, {"fleet.jitter", "0"}};
    const auto cfg = parse_config(kShort, ov);
    const auto cut = select_cut(rate, cfg.thresholds).value;
    const auto s = prepare(cfg);
    const auto asfl = run_experiment(with_scheme(cfg, parse_scheme("asfl")), s);
    const auto sfl = run_experiment(with_scheme(cfg, parse_scheme("sfl" + std::to_string(cut))), s);
    const bool same = same_trajectory(asfl, sfl);
    ok = ok && same;
    detail += ", asfl@" + fmt("%.2g", rate) + "==sfl" + std::to_string(cut) + (same ? " yes" : " NO");
  }
  return {ok, detail + " (3 rounds, bitwise)"};
}

// 6. aggregation
Outcome aggregation() {
  std::mt19937_64 rng(606);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto spec = test::random_model(rng, test::pick(rng, 2, 5));
    const auto global = test::random_params(spec, rng);
    std::vector<ParameterSet> models;
    const std::size_t n = test::pick(rng, 1, 8);
    for (std::size_t i = 0; i < n; ++i) models.push_back(test::random_params(spec, rng));
    const auto agg = aggregate(global, models, AggregationMode::FedAvgMean);
    for (std::size_t k = 0; k < global.size(); ++k) {
      double s = 0.0;
      for (const auto& m : models) s += m.values()[k];
      worst = std::max(worst, std::abs(agg.values()[k] - s / static_cast<double>(n)));
    }
  }
  const auto scalar_spec = make_model({Dense{1, 1}}, TensorShape{1}, 1);
  auto scalar = [&](double v) {
    auto p = ParameterSet::zeros(scalar_spec, 0, 1);
    p.values()[0] = v;
    return p;
  };
  const double literal =
      aggregate(scalar(0.0), std::vector<ParameterSet>{scalar(1.0), scalar(3.0)}, AggregationMode::PaperLiteral)
          .values()[0];
  const bool ok = worst <= 1e-7 && literal == -2.0;
  return {ok, "50 sets, max |mean err| " + fmt("%.2e", worst) + "; literal w=[0], [1],[3] -> [" + fmt("%g", literal) +
                  "]"};
}

// Independent statement of the band rule.
std::size_t band_oracle(double rate, const SelectionThresholds& t) {
  if (rate <= t.r1) return 8;
  if (rate <= t.r2) return 6;
  if (rate <= t.r3) return 4;
  return 2;
}

// 7. cut selection
Outcome cut_selection() {
  const SelectionThresholds ref{5e7, 1e8, 2e8, 4e8};
  std::size_t checked = 0, wrong = 0;
  auto expect = [&](double rate, const SelectionThresholds& t, std::size_t cut) {
    ++checked;
    if (select_cut(rate, t).value != cut) ++wrong;
  };
  const double inf = std::numeric_limits<double>::infinity();
  const double bounds[] = {ref.r1, ref.r2, ref.r3, ref.r4};
  const std::size_t below[] = {8, 6, 4, 2};
  const std::size_t above[] = {6, 4, 2, 2};
  for (int i = 0; i < 4; ++i) {
    expect(bounds[i], ref, below[i]);
    expect(std::nextafter(bounds[i], 0.0), ref, below[i]);
    expect(std::nextafter(bounds[i], inf), ref, above[i]);
  }
  expect(std::numeric_limits<double>::min(), ref, 8);
  expect(1e12, ref, 2);
  expect(std::numeric_limits<double>::max(), ref, 2);
  for (int i = 1; i <= 10000; ++i) {
    const double rate = 6e8 * i / 10000.0;
    expect(rate, ref, band_oracle(rate, ref));
  }
  // Degenerate bands collapse cleanly.
  const SelectionThresholds flat{1.0, 1.0, 1.0, 1.0};
  expect(1.0, flat, 8);
  expect(std::nextafter(1.0, 2.0), flat, 2);

  std::mt19937_64 rng(707);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  std::size_t scale_wrong = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<double> r{u(rng), u(rng), u(rng), u(rng)};
    std::sort(r.begin(), r.end());
    const SelectionThresholds t{r[0], r[1], r[2], r[3]};
    const double k = std::ldexp(1.0, static_cast<int>(test::pick(rng, 0, 60)) - 30);
    const SelectionThresholds ts{r[0] * k, r[1] * k, r[2] * k, r[3] * k};
    // Include exact threshold hits.
    const double rate = trial % 5 == 0 ? r[trial % 4] : u(rng) * 1.2;
    if (select_cut(rate, t) != select_cut(rate * k, ts)) ++scale_wrong;
    expect(rate, t, band_oracle(rate, t));
  }
  bool rejects = false;
  try {
    check_thresholds({4, 3, 2, 1});
  } catch (const ConfigError&) {
    rejects = true;
  }
  const bool ok = wrong == 0 && scale_wrong == 0 && rejects;
  return {ok, std::to_string(checked) + " band checks, " + std::to_string(wrong) + " wrong; 2000 scalings, " +
                  std::to_string(scale_wrong) + " changed; unordered thresholds " + (rejects ? "rejected" : "ACCEPTED")};
}

constexpr const char* kNonIid = R"({
  "scheme": "fl", "model": "resmini",
  "dataset": {"num_classes": 10, "per_class": 200},
  "partition": {"mode": "noniid", "labels_per_vehicle": 6},
  "n_vehicles": 4, "rounds": 30, "local_epochs": 1, "batch_size": 16, "lr": 0.05
})";

// 8. non-IID learning sanity
Outcome noniid_learning(const std::filesystem::path& workdir) {
  const auto cfg = parse_config(kNonIid);
  const auto res = sweep(cfg, std::vector<std::string>{"fl", "asfl"});
  for (const auto& r : res) write_outputs(r, workdir / "noniid");
  const auto& fl = res[0].summary;
  const auto& asfl = res[1].summary;
  const double untrained = fl.initial_accuracy;
  const bool ok = asfl.final_accuracy >= fl.final_accuracy - 0.02 && fl.final_accuracy >= untrained + 0.20 &&
                  asfl.final_accuracy >= untrained + 0.20;
  return {ok, "untrained " + fmt("%.3f", untrained) + ", fl " + fmt("%.3f", fl.final_accuracy) + ", asfl " +
                  fmt("%.3f", asfl.final_accuracy) + " after 30 rounds"};
}

// 9. determinism
Outcome determinism(const std::filesystem::path& workdir) {
  const std::vector<std::string> schemes{"cl", "fl", "sl", "sfl4", "asfl"};
  std::vector<std::filesystem::path> dirs{workdir / "determinism_a", workdir / "determinism_b"};
  std::vector<std::vector<OutputFiles>> files(2);
  for (std::size_t pass = 0; pass < 2; ++pass) {
    std::filesystem::remove_all(dirs[pass]);
    const auto cfg = parse_config(kShort);
    for (const auto& r : sweep(cfg, schemes)) files[pass].push_back(write_outputs(r, dirs[pass]));
  }
  std::size_t identical = 0, total = 0;
  for (std::size_t i = 0; i < schemes.size(); ++i) {
    total += 2;
    identical += slurp(files[0][i].metrics) == slurp(files[1][i].metrics) && !slurp(files[0][i].metrics).empty();
    identical += slurp(files[0][i].summary) == slurp(files[1][i].summary);
  }
  return {identical == total, std::to_string(identical) + "/" + std::to_string(total) + " files byte-identical over " +
                                  std::to_string(schemes.size()) + " schemes"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"asfl acceptance suite"};
  std::filesystem::path workdir = "acceptance_out";
  std::vector<int> only;
  app.add_option("--workdir", workdir, "Directory for run outputs");
  app.add_option("--only", only, "Run only these criteria (1-9)")->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);
  std::filesystem::create_directories(workdir);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"split equivalence", split_equivalence},
      {"gradient correctness", gradients},
      {"communication-load ordering", communication_ordering},
      {"latency trends", latency},
      {"scheme-collapse oracles", scheme_collapse},
      {"aggregation", aggregation},
      {"cut selection", cut_selection},
      {"non-iid learning sanity", [&] { return noniid_learning(workdir); }},
      {"determinism", [&] { return determinism(workdir); }},
  };

  const std::set<int> selected(only.begin(), only.end());
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += out.pass ? 0 : 1;
    std::printf("%s %d %-28s %s [%.1fs]\n", out.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                out.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
