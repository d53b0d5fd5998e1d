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

#include <algorithm>
#include <future>
#include <string>
#include <utility>

#include "asfl/errors.hpp"
#include "asfl/orchestrator.hpp"

namespace asfl {

void ByteCounts::add(const Message& m) noexcept {
  switch (m.kind) {
    case MessageKind::ModelDown:
      model_down += m.bytes;
      break;
    case MessageKind::ModelUp:
      model_up += m.bytes;
      break;
    case MessageKind::SmashedUp:
      smashed_up += m.bytes;
      break;
    case MessageKind::LabelsUp:
      labels_up += m.bytes;
      break;
    case MessageKind::GradientDown:
      gradient_down += m.bytes;
      break;
    case MessageKind::DataUp:
      data_up += m.bytes;
      break;
  }
}

ByteCounts& ByteCounts::operator+=(const ByteCounts& o) noexcept {
  model_down += o.model_down;
  model_up += o.model_up;
  smashed_up += o.smashed_up;
  labels_up += o.labels_up;
  gradient_down += o.gradient_down;
  data_up += o.data_up;
  return *this;
}

namespace {

std::vector<std::span<const std::size_t>> make_batches(const std::vector<std::size_t>& indices, std::size_t batch) {
  std::vector<std::span<const std::size_t>> out;
  for (std::size_t start = 0; start < indices.size(); start += batch) {
    out.emplace_back(indices.data() + start, std::min(batch, indices.size() - start));
  }
  return out;
}

void check_context(const RoundContext& ctx) {
  if (ctx.fleet.vehicles.size() != ctx.fleet.partition.size()) {
    throw RangeError("fleet has " + std::to_string(ctx.fleet.vehicles.size()) + " profiles but " +
                     std::to_string(ctx.fleet.partition.size()) + " partitions");
  }
  if (ctx.options.batch_size == 0) throw RangeError("batch size must be positive");
  for (const auto& v : ctx.fleet.vehicles) check_profile(v);
  check_profile(ctx.rsu);
}

/// One vehicle-side model paired with one RSU-side model. Each step is a full
/// smashed-data round trip: vehicle forward, upload, RSU forward/loss/backward and
/// update, gradient download, vehicle backward and update.
class SplitTrainer {
 public:
  SplitTrainer(const ModelSpec& spec, SplitModel model, double lr) : spec_(spec), model_(std::move(model)), lr_(lr) {}

  StepCost step(const Batch& batch, std::size_t vehicle, std::vector<Message>& log) {
    const std::size_t cut = model_.cut.value;
    const std::size_t layers = spec_.layer_count();
    const std::size_t b = batch.size();
    StepCost cost;

    ForwardResult front;
    if (cut > 0) {
      front = forward(spec_, model_.vehicle_side, batch.inputs, 0, cut);
      cost.vehicle_forward_flops = static_cast<double>(flops(spec_, 0, cut, b));
      cost.vehicle_backward_flops = static_cast<double>(backward_flops(spec_, 0, cut, b));
    }

    Tensor cut_grad;
    if (cut < layers) {
      const Tensor& smashed = cut > 0 ? front.output : batch.inputs;
      cost.up_bytes = smashed_bytes(spec_, model_.cut, b) + label_bytes(b);
      log.push_back({vehicle, MessageKind::SmashedUp, smashed_bytes(spec_, model_.cut, b)});
      log.push_back({vehicle, MessageKind::LabelsUp, label_bytes(b)});

      auto back = forward(spec_, model_.rsu_side, smashed, cut, layers);
      auto loss = softmax_cross_entropy(back.output, batch.labels);
      record_loss(loss.loss, b);
      auto grads = backward(spec_, model_.rsu_side, back.cache, loss.grad, cut > 0);
      sgd_update(model_.rsu_side, grads.params, lr_);
      cost.rsu_flops = static_cast<double>(flops(spec_, cut, layers, b) + backward_flops(spec_, cut, layers, b));

      if (cut > 0) {
        cost.down_bytes = gradient_bytes(spec_, model_.cut, b);
        log.push_back({vehicle, MessageKind::GradientDown, cost.down_bytes});
        cut_grad = std::move(grads.input);
      }
    } else {
      auto loss = softmax_cross_entropy(front.output, batch.labels);
      record_loss(loss.loss, b);
      cut_grad = std::move(loss.grad);
    }

    if (cut > 0) {
      auto grads = backward(spec_, model_.vehicle_side, front.cache, cut_grad, false);
      sgd_update(model_.vehicle_side, grads.params, lr_);
    }
    return cost;
  }

  const SplitModel& model() const { return model_; }
  void reset(SplitModel model) { model_ = std::move(model); }

  double loss_sum() const { return loss_sum_; }
  std::size_t samples() const { return samples_; }

 private:
  void record_loss(double loss, std::size_t b) {
    loss_sum_ += loss * static_cast<double>(b);
    samples_ += b;
  }

  const ModelSpec& spec_;
  SplitModel model_;
  double lr_;
  double loss_sum_ = 0.0;
  std::size_t samples_ = 0;
};

VehicleTrace empty_trace(const RoundContext& ctx, std::size_t id, const ChannelSample& rate) {
  VehicleTrace t;
  t.vehicle = id;
  t.capacity = ctx.fleet.vehicles[id].compute_capacity;
  t.up_rate = rate.rate;
  t.down_rate = std::min(rate.rate, ctx.rsu.broadcast_rate);
  return t;
}

// Runs all local epochs of one vehicle through `trainer`, bracketed by the
// vehicle-side model download and upload.
void train_locally(const RoundContext& ctx, SplitTrainer& trainer, std::size_t id, VehicleTrace& trace,
                   std::vector<Message>& log) {
  const auto side_bytes = param_bytes(ctx.spec, 0, trainer.model().cut.value);
  trace.model_down_bytes = side_bytes;
  trace.model_up_bytes = side_bytes;
  log.push_back({id, MessageKind::ModelDown, side_bytes});
  const auto batches = make_batches(ctx.fleet.partition.vehicles[id], ctx.options.batch_size);
  for (std::size_t epoch = 0; epoch < ctx.options.local_epochs; ++epoch) {
    for (const auto& idx : batches) trace.steps.push_back(trainer.step(gather(ctx.train, idx), id, log));
  }
  log.push_back({id, MessageKind::ModelUp, side_bytes});
}

struct LocalRun {
  ParameterSet model;
  VehicleTrace trace;
  std::vector<Message> log;
  double loss_sum = 0.0;
  std::size_t samples = 0;
};

LocalRun run_vehicle(const RoundContext& ctx, const ParameterSet& global, std::size_t id, CutIndex cut,
                     const ChannelSample& rate) {
  LocalRun run;
  run.trace = empty_trace(ctx, id, rate);
  SplitTrainer trainer(ctx.spec, split(ctx.spec, global, cut), ctx.options.lr);
  train_locally(ctx, trainer, id, run.trace, run.log);
  run.model = merge(ctx.spec, trainer.model());
  run.loss_sum = trainer.loss_sum();
  run.samples = trainer.samples();
  return run;
}

VehicleRoundRecord vehicle_record(std::size_t id, CutIndex cut, const ChannelSample& rate, std::size_t samples,
                                  const VehicleTrace* trace, std::span<const Message> log) {
  VehicleRoundRecord r;
  r.vehicle = id;
  r.cut = cut;
  r.rate = rate.rate;
  r.samples = samples;
  r.steps = trace ? trace->steps.size() : 0;
  for (const auto& m : log) {
    if (m.vehicle == id) r.bytes.add(m);
  }
  return r;
}

void finalize(RoundRecord& rec, const RoundTiming& timing, double loss_sum, std::size_t samples) {
  for (const auto& m : rec.messages) rec.bytes.add(m);
  rec.seconds = timing.phases;
  rec.wall_clock = timing.wall_clock;
  rec.train_loss = samples > 0 ? loss_sum / static_cast<double>(samples) : 0.0;
}

std::pair<RoundState, RoundRecord> parallel_round(const RoundState& state, const RoundContext& ctx,
                                                  const CutAssignment& cuts, bool lockstep, std::string scheme) {
  check_context(ctx);
  const std::size_t n = ctx.fleet.vehicles.size();
  if (cuts.cuts.size() != n) throw RangeError("cut assignment does not cover every vehicle");
  for (auto c : cuts.cuts) check_cut(ctx.spec, c);
  const auto rates = round_rates(ctx, state.round);

  std::vector<std::size_t> active;
  for (std::size_t id = 0; id < n; ++id) {
    if (check_dwell(ctx.fleet.vehicles[id], state.clock)) active.push_back(id);
  }

  // Vehicle tasks share nothing mutable; results are consumed in id order.
  std::vector<std::future<LocalRun>> tasks;
  for (auto id : active) {
    tasks.push_back(std::async(std::launch::async, run_vehicle, std::cref(ctx), std::cref(state.global), id,
                               cuts.cuts[id], std::cref(rates[id])));
  }
  std::vector<LocalRun> runs;
  for (auto& t : tasks) runs.push_back(t.get());

  std::vector<VehicleTrace> traces;
  for (const auto& r : runs) traces.push_back(r.trace);
  const double aggregate_flops = static_cast<double>(runs.size()) * static_cast<double>(state.global.size());
  const RoundTiming timing = lockstep ? time_lockstep(traces, ctx.rsu, aggregate_flops)
                                      : time_parallel_local(traces, ctx.rsu, aggregate_flops);

  RoundRecord rec;
  rec.round = state.round;
  rec.scheme = std::move(scheme);
  std::vector<ParameterSet> kept;
  std::vector<double> weights;
  double loss_sum = 0.0;
  std::size_t samples = 0;
  std::size_t k = 0;
  for (std::size_t id = 0; id < n; ++id) {
    const std::size_t data = ctx.fleet.partition.vehicles[id].size();
    if (k < active.size() && active[k] == id) {
      const auto& run = runs[k];
      auto vr = vehicle_record(id, cuts.cuts[id], rates[id], data, &run.trace, run.log);
      vr.finish = timing.finish[k];
      vr.dropped = !check_dwell(ctx.fleet.vehicles[id], state.clock + vr.finish);
      if (!vr.dropped) {
        kept.push_back(run.model);
        weights.push_back(static_cast<double>(data));
      }
      rec.messages.insert(rec.messages.end(), run.log.begin(), run.log.end());
      loss_sum += run.loss_sum;
      samples += run.samples;
      rec.vehicles.push_back(std::move(vr));
      ++k;
    } else {
      auto vr = vehicle_record(id, cuts.cuts[id], rates[id], data, nullptr, {});
      vr.dropped = true;
      rec.vehicles.push_back(std::move(vr));
    }
  }
  finalize(rec, timing, loss_sum, samples);
  rec.participants = kept.size();

  RoundState next;
  next.round = state.round + 1;
  next.global = kept.empty() ? state.global : aggregate(state.global, kept, ctx.options.aggregation, weights);
  next.clock = state.clock + timing.wall_clock;
  return {std::move(next), std::move(rec)};
}

}  // namespace

std::vector<ChannelSample> round_rates(const RoundContext& ctx, std::size_t round) {
  std::vector<ChannelSample> out;
  out.reserve(ctx.fleet.vehicles.size());
  for (const auto& v : ctx.fleet.vehicles) out.push_back(sample_rate(v, round, ctx.seed));
  return out;
}

CutAssignment adaptive_cuts(const RoundContext& ctx, std::size_t round, const SelectionThresholds& thr) {
  check_thresholds(thr);
  CutAssignment a;
  for (const auto& s : round_rates(ctx, round)) a.cuts.push_back(select_cut(s, thr));
  return a;
}

std::pair<RoundState, RoundRecord> run_round_fl(const RoundState& state, const RoundContext& ctx) {
  const auto full = CutAssignment::uniform(ctx.fleet.vehicles.size(), CutIndex{ctx.spec.layer_count()});
  return parallel_round(state, ctx, full, false, "fl");
}

std::pair<RoundState, RoundRecord> run_round_sfl(const RoundState& state, const RoundContext& ctx,
                                                 const CutAssignment& cuts) {
  return parallel_round(state, ctx, cuts, true, "sfl");
}

std::pair<RoundState, RoundRecord> run_round_sl(const RoundState& state, const RoundContext& ctx, CutIndex cut) {
  check_context(ctx);
  check_cut(ctx.spec, cut);
  const std::size_t n = ctx.fleet.vehicles.size();
  const auto rates = round_rates(ctx, state.round);

  SplitTrainer trainer(ctx.spec, split(ctx.spec, state.global, cut), ctx.options.lr);
  RoundRecord rec;
  rec.round = state.round;
  rec.scheme = "sl";
  std::vector<VehicleTrace> traces;
  double offset = 0.0;
  double loss_before = 0.0;
  std::size_t samples_before = 0;
  for (std::size_t id = 0; id < n; ++id) {
    const std::size_t data = ctx.fleet.partition.vehicles[id].size();
    if (!check_dwell(ctx.fleet.vehicles[id], state.clock + offset)) {
      auto vr = vehicle_record(id, cut, rates[id], data, nullptr, {});
      vr.dropped = true;
      vr.finish = offset;
      rec.vehicles.push_back(std::move(vr));
      continue;
    }
    const SplitModel snapshot = trainer.model();
    VehicleTrace trace = empty_trace(ctx, id, rates[id]);
    std::vector<Message> log;
    train_locally(ctx, trainer, id, trace, log);

    const VehicleTrace single[] = {trace};
    offset += time_sequential(single, ctx.rsu).wall_clock;
    auto vr = vehicle_record(id, cut, rates[id], data, &trace, log);
    vr.finish = offset;
    vr.dropped = !check_dwell(ctx.fleet.vehicles[id], state.clock + offset);
    if (vr.dropped) {
      trainer.reset(snapshot);
    } else {
      ++rec.participants;
    }
    loss_before = trainer.loss_sum();
    samples_before = trainer.samples();
    rec.messages.insert(rec.messages.end(), log.begin(), log.end());
    rec.vehicles.push_back(std::move(vr));
    traces.push_back(std::move(trace));
  }
  finalize(rec, time_sequential(traces, ctx.rsu), loss_before, samples_before);

  RoundState next;
  next.round = state.round + 1;
  next.global = merge(ctx.spec, trainer.model());
  next.clock = state.clock + rec.wall_clock;
  return {std::move(next), std::move(rec)};
}

std::pair<RoundState, RoundRecord> run_round_cl(const RoundState& state, const RoundContext& ctx) {
  check_context(ctx);
  const std::size_t n = ctx.fleet.vehicles.size();
  const std::size_t layers = ctx.spec.layer_count();
  const auto rates = round_rates(ctx, state.round);
  const std::size_t pixels = ctx.train.sample_shape().numel();

  RoundRecord rec;
  rec.round = state.round;
  rec.scheme = "cl";
  std::vector<std::size_t> pooled;
  std::vector<VehicleTrace> traces;
  for (std::size_t id = 0; id < n; ++id) {
    const auto& part = ctx.fleet.partition.vehicles[id];
    pooled.insert(pooled.end(), part.begin(), part.end());
    VehicleTrace trace = empty_trace(ctx, id, rates[id]);
    std::vector<Message> log;
    if (state.round == 0) {
      const std::uint64_t data_bytes = static_cast<std::uint64_t>(part.size()) * pixels * kBytesPerScalar;
      log.push_back({id, MessageKind::DataUp, data_bytes});
      log.push_back({id, MessageKind::LabelsUp, label_bytes(part.size())});
      trace.data_up_bytes = data_bytes + label_bytes(part.size());
    }
    rec.vehicles.push_back(vehicle_record(id, CutIndex{0}, rates[id], part.size(), &trace, log));
    rec.messages.insert(rec.messages.end(), log.begin(), log.end());
    traces.push_back(std::move(trace));
  }

  ParameterSet params = state.global;
  const auto batches = make_batches(pooled, ctx.options.batch_size);
  double loss_sum = 0.0;
  std::size_t samples = 0;
  for (std::size_t epoch = 0; epoch < ctx.options.local_epochs; ++epoch) {
    for (const auto& idx : batches) {
      const Batch batch = gather(ctx.train, idx);
      auto fwd = forward(ctx.spec, params, batch.inputs, 0, layers);
      auto loss = softmax_cross_entropy(fwd.output, batch.labels);
      auto grads = backward(ctx.spec, params, fwd.cache, loss.grad, false);
      sgd_update(params, grads.params, ctx.options.lr);
      loss_sum += loss.loss * static_cast<double>(batch.size());
      samples += batch.size();
    }
  }
  const double rsu_flops = static_cast<double>(flops(ctx.spec, 0, layers, 1) + backward_flops(ctx.spec, 0, layers, 1)) *
                           static_cast<double>(pooled.size() * ctx.options.local_epochs);
  finalize(rec, time_centralized(traces, ctx.rsu, rsu_flops), loss_sum, samples);
  rec.participants = n;

  RoundState next;
  next.round = state.round + 1;
  next.global = std::move(params);
  next.clock = state.clock + rec.wall_clock;
  return {std::move(next), std::move(rec)};
}

Evaluation evaluate(const ModelSpec& spec, const ParameterSet& params, const Dataset& test) {
  if (test.size() == 0) throw DataError("cannot evaluate on an empty test set");
  check_dataset(test);
  constexpr std::size_t kChunk = 256;
  std::vector<std::size_t> idx;
  double loss_sum = 0.0;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < test.size(); start += kChunk) {
    const std::size_t end = std::min(test.size(), start + kChunk);
    idx.resize(end - start);
    for (std::size_t i = start; i < end; ++i) idx[i - start] = i;
    const Batch batch = gather(test, idx);
    const Tensor logits = infer(spec, params, batch.inputs, 0, spec.layer_count());
    loss_sum += softmax_cross_entropy(logits, batch.labels).loss * static_cast<double>(batch.size());
    const std::size_t classes = logits.shape()[1];
    for (std::size_t r = 0; r < batch.size(); ++r) {
      const double* row = logits.data() + r * classes;
      const auto best = static_cast<std::size_t>(std::max_element(row, row + classes) - row);
      if (best == static_cast<std::size_t>(batch.labels[r])) ++correct;
    }
  }
  const auto n = static_cast<double>(test.size());
  return Evaluation{loss_sum / n, static_cast<double>(correct) / n};
}

}  // namespace asfl
