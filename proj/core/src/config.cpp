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

#include "asfl/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "asfl/errors.hpp"
#include "asfl/reference_models.hpp"
#include "json.hpp"

namespace asfl {

using nlohmann::json;

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::CL:
      return "cl";
    case Scheme::FL:
      return "fl";
    case Scheme::SL:
      return "sl";
    case Scheme::SFL:
      return "sfl";
    case Scheme::ASFL:
      return "asfl";
  }
  return "?";
}

std::string SchemeToken::str() const {
  auto s = to_string(scheme);
  const bool default_sl = scheme == Scheme::SL && cut == std::size_t{1};
  if (cut && !default_sl && (scheme == Scheme::SL || scheme == Scheme::SFL)) s += std::to_string(*cut);
  return s;
}

SchemeToken parse_scheme(const std::string& token) {
  static const std::pair<const char*, Scheme> kPlain[] = {
      {"cl", Scheme::CL}, {"fl", Scheme::FL}, {"asfl", Scheme::ASFL}, {"sfl", Scheme::SFL}, {"sl", Scheme::SL}};
  for (const auto& [name, scheme] : kPlain) {
    if (token == name) return {scheme, std::nullopt};
  }
  for (const auto& [name, scheme] : {std::pair{"sfl", Scheme::SFL}, std::pair{"sl", Scheme::SL}}) {
    const std::string prefix = name;
    if (token.size() > prefix.size() && token.compare(0, prefix.size(), prefix) == 0) {
      const auto digits = token.substr(prefix.size());
      if (digits.find_first_not_of("0123456789") == std::string::npos && digits.size() <= 6) {
        return {scheme, static_cast<std::size_t>(std::stoul(digits))};
      }
    }
  }
  throw ConfigError("scheme", "unknown scheme '" + token + "' (expected cl, fl, sl[N], sfl[N] or asfl)");
}

void check_scheme_fits(const SchemeToken& scheme, const ModelSpec& model) {
  if (scheme.scheme == Scheme::ASFL && model.layer_count() < kAdaptiveMinLayers) {
    throw ConfigError("model", "asfl selects cuts up to " + std::to_string(kAdaptiveMinLayers) + " but the model has " +
                                   std::to_string(model.layer_count()) + " layers");
  }
}

CutIndex RunConfig::cut() const { return CutIndex{scheme.cut.value_or(model.layer_count())}; }

std::vector<VehicleProfile> RunConfig::vehicle_profiles() const {
  if (!fleet.vehicles.empty()) return fleet.vehicles;
  std::vector<VehicleProfile> out;
  for (std::size_t i = 0; i < n_vehicles; ++i) {
    out.push_back({i, fleet.compute_capacity, {fleet.mean_rates[i % fleet.mean_rates.size()], fleet.jitter},
                   fleet.dwell_time});
  }
  return out;
}

TrainOptions RunConfig::train_options() const { return {local_epochs, batch_size, lr, aggregation}; }

namespace {

std::string join(const std::string& prefix, const std::string& key) { return prefix.empty() ? key : prefix + "." + key; }

/// Reads typed fields out of one JSON object and rejects keys nobody asked for.
class Reader {
 public:
  Reader(const json& obj, std::string prefix) : obj_(obj), prefix_(std::move(prefix)) {
    if (!obj_.is_object()) throw ConfigError(prefix_.empty() ? "config" : prefix_, "expected an object");
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  std::string field(const std::string& key) const { return join(prefix_, key); }

  double number(const std::string& key, double def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_number()) throw ConfigError(field(key), "expected a number");
    const double d = v->get<double>();
    if (!std::isfinite(d)) throw ConfigError(field(key), "must be finite");
    return d;
  }

  std::size_t count(const std::string& key, std::size_t def) {
    const json* v = find(key);
    if (!v) return def;
    if (v->is_number_unsigned()) return v->get<std::size_t>();
    if (v->is_number_integer() && v->get<std::int64_t>() >= 0) return v->get<std::size_t>();
    throw ConfigError(field(key), "expected a non-negative integer");
  }

  std::string text(const std::string& key, const std::string& def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_string()) throw ConfigError(field(key), "expected a string");
    return v->get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_array()) throw ConfigError(field(key), "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : *v) {
      if (!e.is_number()) throw ConfigError(field(key), "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(field(it.key()), "unknown field");
    }
  }

 private:
  const json& obj_;
  std::string prefix_;
  std::set<std::string> seen_;
};

std::size_t layer_count_field(Reader& r, const char* key) {
  const std::size_t v = r.count(key, 0);
  if (v == 0) throw ConfigError(r.field(key), "must be a positive integer");
  return v;
}

LayerKind parse_layer(const json& j, const std::string& where) {
  Reader r(j, where);
  const auto type = r.text("type", "");
  LayerKind kind;
  if (type == "dense") {
    kind = Dense{layer_count_field(r, "in"), layer_count_field(r, "out")};
  } else if (type == "conv2d") {
    Conv2d c;
    c.in_ch = layer_count_field(r, "in_ch");
    c.out_ch = layer_count_field(r, "out_ch");
    c.kernel = r.count("kernel", 3);
    c.stride = r.count("stride", 1);
    c.pad = r.count("pad", 0);
    kind = c;
  } else if (type == "relu") {
    kind = Relu{};
  } else if (type == "maxpool") {
    kind = MaxPool{r.count("kernel", 2), r.count("stride", 2)};
  } else if (type == "avgpool_global") {
    kind = AvgPoolGlobal{};
  } else if (type == "flatten") {
    kind = Flatten{};
  } else if (type == "residual_block") {
    kind = ResidualBlock{layer_count_field(r, "channels")};
  } else {
    throw ConfigError(r.field("type"), "unknown layer type '" + type + "'");
  }
  r.finish();
  return kind;
}

ModelSpec parse_inline_model(const json& j) {
  Reader r(j, "model");
  const json* shape = r.find("input_shape");
  if (!shape || !shape->is_array() || shape->empty()) throw ConfigError("model.input_shape", "expected an array");
  std::vector<std::size_t> dims;
  for (const auto& d : *shape) {
    if (!d.is_number_unsigned() || d.get<std::size_t>() == 0) {
      throw ConfigError("model.input_shape", "extents must be positive integers");
    }
    dims.push_back(d.get<std::size_t>());
  }
  const std::size_t classes = r.count("num_classes", 0);
  if (classes < 2) throw ConfigError("model.num_classes", "must be at least 2");
  const json* layers = r.find("layers");
  if (!layers || !layers->is_array() || layers->empty()) throw ConfigError("model.layers", "expected a non-empty array");
  std::vector<LayerKind> kinds;
  for (std::size_t i = 0; i < layers->size(); ++i) {
    kinds.push_back(parse_layer((*layers)[i], "model.layers[" + std::to_string(i) + "]"));
  }
  r.finish();
  try {
    return make_model(std::move(kinds), TensorShape(dims), classes);
  } catch (const Error& e) {
    throw ConfigError("model", e.what());
  }
}

json layer_to_json(const LayerKind& kind) {
  json j;
  j["type"] = kind_name(kind);
  if (const auto* d = std::get_if<Dense>(&kind)) {
    j["in"] = d->in;
    j["out"] = d->out;
  } else if (const auto* c = std::get_if<Conv2d>(&kind)) {
    j["in_ch"] = c->in_ch;
    j["out_ch"] = c->out_ch;
    j["kernel"] = c->kernel;
    j["stride"] = c->stride;
    j["pad"] = c->pad;
  } else if (const auto* p = std::get_if<MaxPool>(&kind)) {
    j["kernel"] = p->kernel;
    j["stride"] = p->stride;
  } else if (const auto* b = std::get_if<ResidualBlock>(&kind)) {
    j["channels"] = b->channels;
  }
  return j;
}

json model_json(const ModelSpec& spec) {
  json j;
  j["input_shape"] = spec.input_shape.dims();
  j["num_classes"] = spec.num_classes;
  j["layers"] = json::array();
  for (const auto& l : spec.layers) j["layers"].push_back(layer_to_json(l.kind));
  return j;
}

json dwell_json(double dwell) { return std::isinf(dwell) ? json(nullptr) : json(dwell); }

void apply_override(json& root, const Override& o) {
  const auto& [path, raw] = o;
  if (path.empty()) throw ConfigError("override", "empty key");
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &root;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (parts[i].empty()) throw ConfigError(path, "malformed key");
    json& next = (*node)[parts[i]];
    if (next.is_null()) next = json::object();
    if (!next.is_object()) throw ConfigError(path, "'" + parts[i] + "' is not an object");
    node = &next;
  }
  if (parts.empty() || parts.back().empty()) throw ConfigError(path, "malformed key");
  (*node)[parts.back()] = std::move(value);
}

// Rethrows range checks from the simulator as config errors on `field`.
template <class F>
void as_config(const std::string& field, F&& check) {
  try {
    check();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(field, e.what());
  }
}

RunConfig resolve(const json& root) {
  RunConfig cfg;
  Reader r(root, "");

  const auto scheme_text = r.text("scheme", "");
  if (scheme_text.empty()) throw ConfigError("scheme", "required");
  cfg.scheme = parse_scheme(scheme_text);
  if (r.find("cut")) {
    const std::size_t cut = r.count("cut", 0);
    if (cfg.scheme.cut && *cfg.scheme.cut != cut) {
      throw ConfigError("cut", "conflicts with scheme '" + scheme_text + "'");
    }
    cfg.scheme.cut = cut;
  }

  const json* m = r.find("model");
  if (m && !m->is_string()) {
    cfg.model_name = "inline";
    cfg.model = parse_inline_model(*m);
  }
  const std::size_t default_classes = m && !m->is_string() ? cfg.model.num_classes : 10;
  if (const json* d = r.find("dataset")) {
    Reader dr(*d, "dataset");
    cfg.dataset.source = dr.text("source", cfg.dataset.source);
    cfg.dataset.path = dr.text("path", "");
    cfg.dataset.num_classes = dr.count("num_classes", default_classes);
    cfg.dataset.per_class = dr.count("per_class", cfg.dataset.per_class);
    cfg.dataset.noise = dr.number("noise", cfg.dataset.noise);
    dr.finish();
  } else {
    cfg.dataset.num_classes = default_classes;
  }
  if (cfg.dataset.num_classes < 2) throw ConfigError("dataset.num_classes", "must be at least 2");
  if (cfg.model_name != "inline") {
    if (m) cfg.model_name = m->get<std::string>();
    cfg.model = model_by_name(cfg.model_name, cfg.dataset.num_classes);
  }

  switch (cfg.scheme.scheme) {
    case Scheme::SL:
      if (!cfg.scheme.cut) cfg.scheme.cut = 1;
      break;
    case Scheme::SFL:
      if (!cfg.scheme.cut) throw ConfigError("cut", "required for sfl (or use sflN)");
      break;
    default:
      if (cfg.scheme.cut) throw ConfigError("cut", "only valid for sl and sfl");
  }
  if (cfg.scheme.cut) as_config("cut", [&] { check_cut(cfg.model, CutIndex{*cfg.scheme.cut}); });
  check_scheme_fits(cfg.scheme, cfg.model);

  if (cfg.dataset.source != "synth" && cfg.dataset.source != "csv") {
    throw ConfigError("dataset.source", "expected 'synth' or 'csv'");
  }
  if (cfg.dataset.source == "csv" && cfg.dataset.path.empty()) throw ConfigError("dataset.path", "required for csv");
  if (cfg.dataset.source == "synth" && !cfg.dataset.path.empty()) {
    throw ConfigError("dataset.path", "only valid for csv");
  }
  if (cfg.dataset.num_classes != cfg.model.num_classes) {
    throw ConfigError("dataset.num_classes", "does not match the model's " + std::to_string(cfg.model.num_classes));
  }
  if (cfg.dataset.per_class == 0) throw ConfigError("dataset.per_class", "must be positive");
  if (cfg.dataset.noise < 0.0) throw ConfigError("dataset.noise", "must be non-negative");

  cfg.test_fraction = r.number("test_fraction", cfg.test_fraction);
  if (!(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0)) throw ConfigError("test_fraction", "must be in (0, 1)");

  if (const json* p = r.find("partition")) {
    if (p->is_string()) {
      const auto mode = p->get<std::string>();
      if (mode != "iid" && mode != "noniid") throw ConfigError("partition", "expected 'iid' or 'noniid'");
      cfg.partition.iid = mode == "iid";
    } else {
      Reader pr(*p, "partition");
      const auto mode = pr.text("mode", "iid");
      if (mode != "iid" && mode != "noniid") throw ConfigError("partition.mode", "expected 'iid' or 'noniid'");
      cfg.partition.iid = mode == "iid";
      cfg.partition.labels_per_vehicle = pr.count("labels_per_vehicle", cfg.partition.labels_per_vehicle);
      cfg.partition.power_alpha = pr.number("power_alpha", cfg.partition.power_alpha);
      pr.finish();
    }
  }
  if (!cfg.partition.iid &&
      (cfg.partition.labels_per_vehicle == 0 || cfg.partition.labels_per_vehicle > cfg.model.num_classes)) {
    throw ConfigError("partition.labels_per_vehicle", "must be in [1, num_classes]");
  }
  if (cfg.partition.power_alpha < 0.0) throw ConfigError("partition.power_alpha", "must be non-negative");

  cfg.n_vehicles = r.count("n_vehicles", cfg.n_vehicles);
  if (cfg.n_vehicles == 0) throw ConfigError("n_vehicles", "must be positive");
  cfg.rounds = r.count("rounds", cfg.rounds);
  cfg.local_epochs = r.count("local_epochs", cfg.local_epochs);
  if (cfg.local_epochs == 0) throw ConfigError("local_epochs", "must be positive");
  cfg.batch_size = r.count("batch_size", cfg.batch_size);
  if (cfg.batch_size == 0) throw ConfigError("batch_size", "must be positive");
  cfg.lr = r.number("lr", cfg.lr);
  if (cfg.lr < 0.0) throw ConfigError("lr", "must be non-negative");

  if (const json* t = r.find("thresholds")) {
    Reader tr(*t, "thresholds");
    cfg.thresholds.r1 = tr.number("r1", cfg.thresholds.r1);
    cfg.thresholds.r2 = tr.number("r2", cfg.thresholds.r2);
    cfg.thresholds.r3 = tr.number("r3", cfg.thresholds.r3);
    cfg.thresholds.r4 = tr.number("r4", cfg.thresholds.r4);
    tr.finish();
  }
  check_thresholds(cfg.thresholds);

  cfg.aggregation = parse_aggregation(r.text("aggregation", to_string(cfg.aggregation)));

  if (const json* f = r.find("fleet")) {
    Reader fr(*f, "fleet");
    cfg.fleet.compute_capacity = fr.number("compute_capacity", cfg.fleet.compute_capacity);
    cfg.fleet.mean_rates = fr.numbers("mean_rates", cfg.fleet.mean_rates);
    cfg.fleet.jitter = fr.number("jitter", cfg.fleet.jitter);
    cfg.fleet.dwell_time = fr.number("dwell_time", cfg.fleet.dwell_time);
    if (const json* vs = fr.find("vehicles")) {
      if (!vs->is_array()) throw ConfigError("fleet.vehicles", "expected an array");
      if (vs->size() != cfg.n_vehicles) {
        throw ConfigError("fleet.vehicles", "has " + std::to_string(vs->size()) + " entries for " +
                                                std::to_string(cfg.n_vehicles) + " vehicles");
      }
      for (std::size_t i = 0; i < vs->size(); ++i) {
        Reader vr((*vs)[i], "fleet.vehicles[" + std::to_string(i) + "]");
        VehicleProfile v;
        v.id = i;
        v.compute_capacity = vr.number("compute_capacity", cfg.fleet.compute_capacity);
        v.rate.mean_rate = vr.number("mean_rate", cfg.fleet.mean_rates.empty() ? 0.0 : cfg.fleet.mean_rates[i % cfg.fleet.mean_rates.size()]);
        v.rate.jitter = vr.number("jitter", cfg.fleet.jitter);
        v.dwell_time = vr.number("dwell_time", cfg.fleet.dwell_time);
        vr.finish();
        cfg.fleet.vehicles.push_back(v);
      }
    }
    fr.finish();
  }
  if (cfg.fleet.mean_rates.empty()) throw ConfigError("fleet.mean_rates", "must not be empty");
  const auto profiles = cfg.vehicle_profiles();
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const std::string field = cfg.fleet.vehicles.empty() ? "fleet" : "fleet.vehicles[" + std::to_string(i) + "]";
    as_config(field, [&] { check_profile(profiles[i]); });
  }

  if (const json* s = r.find("rsu")) {
    Reader sr(*s, "rsu");
    cfg.rsu.compute_capacity = sr.number("compute_capacity", cfg.rsu.compute_capacity);
    cfg.rsu.broadcast_rate = sr.number("broadcast_rate", cfg.rsu.broadcast_rate);
    sr.finish();
  }
  as_config("rsu", [&] { check_profile(cfg.rsu); });

  cfg.seed = r.count("seed", 0);
  cfg.output = r.text("output", "");
  r.finish();
  return cfg;
}

}  // namespace

RunConfig parse_config(const std::string& json_text, std::span<const Override> overrides) {
  json root;
  try {
    root = json_text.find_first_not_of(" \t\r\n") == std::string::npos ? json::object() : json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config", "expected a JSON object");
  for (const auto& o : overrides) apply_override(root, o);
  try {
    return resolve(root);
  } catch (const json::exception& e) {
    throw ConfigError("config", e.what());
  }
}

RunConfig load_config(const std::filesystem::path& path, std::span<const Override> overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

std::string model_to_json(const ModelSpec& spec) { return model_json(spec).dump(); }

std::string canonical_json(const RunConfig& cfg) {
  json j;
  j["scheme"] = to_string(cfg.scheme.scheme);
  j["cut"] = cfg.scheme.cut ? json(*cfg.scheme.cut) : json(nullptr);
  j["model"] = cfg.model_name == "inline" ? model_json(cfg.model) : json(cfg.model_name);
  json ds{{"source", cfg.dataset.source}, {"num_classes", cfg.dataset.num_classes}};
  if (cfg.dataset.source == "csv") {
    ds["path"] = cfg.dataset.path.generic_string();
  } else {
    ds["per_class"] = cfg.dataset.per_class;
    ds["noise"] = cfg.dataset.noise;
  }
  j["dataset"] = ds;
  j["test_fraction"] = cfg.test_fraction;
  j["partition"] = {{"mode", cfg.partition.iid ? "iid" : "noniid"},
                    {"labels_per_vehicle", cfg.partition.labels_per_vehicle},
                    {"power_alpha", cfg.partition.power_alpha}};
  j["n_vehicles"] = cfg.n_vehicles;
  j["rounds"] = cfg.rounds;
  j["local_epochs"] = cfg.local_epochs;
  j["batch_size"] = cfg.batch_size;
  j["lr"] = cfg.lr;
  j["thresholds"] = {{"r1", cfg.thresholds.r1}, {"r2", cfg.thresholds.r2}, {"r3", cfg.thresholds.r3},
                     {"r4", cfg.thresholds.r4}};
  j["aggregation"] = to_string(cfg.aggregation);
  json fleet{{"compute_capacity", cfg.fleet.compute_capacity},
             {"mean_rates", cfg.fleet.mean_rates},
             {"jitter", cfg.fleet.jitter},
             {"dwell_time", dwell_json(cfg.fleet.dwell_time)}};
  if (!cfg.fleet.vehicles.empty()) {
    fleet["vehicles"] = json::array();
    for (const auto& v : cfg.fleet.vehicles) {
      fleet["vehicles"].push_back({{"compute_capacity", v.compute_capacity},
                                   {"mean_rate", v.rate.mean_rate},
                                   {"jitter", v.rate.jitter},
                                   {"dwell_time", dwell_json(v.dwell_time)}});
    }
  }
  j["fleet"] = fleet;
  j["rsu"] = {{"compute_capacity", cfg.rsu.compute_capacity}, {"broadcast_rate", cfg.rsu.broadcast_rate}};
  j["seed"] = cfg.seed;
  return j.dump();
}

std::string fingerprint(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_json(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace asfl
