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

#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "asfl/errors.hpp"
#include "asfl/model.hpp"
#include "asfl/reference_models.hpp"
#include "doctest.h"
#include "json.hpp"
#include "test_util.hpp"

using namespace asfl;
using asfl::test::rel_error;

namespace {

nlohmann::json reference() {
  std::ifstream in(ASFL_TEST_DATA_DIR "/resmini_reference.json");
  REQUIRE(in.good());
  return nlohmann::json::parse(in);
}

double pattern_param(std::size_t i) { return 0.1 * std::sin(0.37 * static_cast<double>(i) + 0.11); }
double pattern_input(std::size_t b, std::size_t i) { return static_cast<double>((7 * i + 13 * b) % 17) / 16.0; }

using test::random_params;
using test::smooth_input;
using test::wrap;

}  // namespace

TEST_CASE("tensor shapes validate their extents") {
  CHECK_THROWS_AS(TensorShape(std::vector<std::size_t>{}), ShapeError);
  CHECK_THROWS_AS((TensorShape{2, 0}), ShapeError);
  const TensorShape s{2, 3, 4};
  CHECK(s.numel() == 24);
  CHECK(s.sample() == TensorShape{3, 4});
  CHECK(TensorShape{3}.with_batch(5) == TensorShape{5, 3});
  CHECK_THROWS_AS(Tensor(TensorShape{2}, std::vector<double>{1.0}), ShapeError);
}

TEST_CASE("build_model is deterministic and Glorot-bounded") {
  const auto spec = make_model({Dense{2, 2}}, TensorShape{2}, 2);
  CHECK(build_model(spec, 7) == build_model(spec, 7));
  CHECK_FALSE(build_model(spec, 7) == build_model(spec, 8));

  const auto d34 = make_model({Dense{3, 4}}, TensorShape{3}, 4);
  CHECK(param_count(d34) == 16);
  CHECK(build_model(d34, 1).size() == 16);

  const auto conv = make_model({Conv2d{2, 3, 3, 1, 1}, Flatten{}, Dense{3 * 5 * 5, 2}}, TensorShape{2, 5, 5}, 2);
  const auto p = build_model(conv, 11);
  const double conv_limit = std::sqrt(6.0 / (2 * 9 + 3 * 9));
  auto w = p.layer(0);
  for (std::size_t i = 0; i < 54; ++i) CHECK(std::abs(w[i]) <= conv_limit);
  for (std::size_t i = 54; i < 57; ++i) CHECK(w[i] == 0.0);
  CHECK(p.layer(1).empty());
}

TEST_CASE("non-composing specs name the offending layer") {
  try {
    make_model({Conv2d{1, 4, 3, 1, 1}, Conv2d{3, 4, 3, 1, 1}, Flatten{}, Dense{4 * 8 * 8, 2}}, TensorShape{1, 8, 8}, 2);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    CHECK(std::string(e.what()).find("layer 1") != std::string::npos);
  }
  CHECK_THROWS_AS(make_model({Dense{4, 3}}, TensorShape{4}, 2), ShapeError);
}

TEST_CASE("resmini counts match the independent counting oracle") {
  const auto ref = reference()["counts"];
  const auto spec = resmini();
  REQUIRE(spec.layer_count() == 10);
  CHECK(spec.split_boundaries() == 9);
  CHECK(param_count(spec) == ref["total_params"].get<std::size_t>());
  CHECK(param_count(spec) == 123450);
  CHECK(flops(spec, 0, 10, 1) == ref["total_flops"].get<std::uint64_t>());
  CHECK(flops(spec, 0, 10, 1) == 759872);

  const auto shapes = boundary_shapes(spec);
  for (std::size_t i = 0; i <= 10; ++i) {
    CHECK(shapes[i].numel() == ref["boundary_elements"][i].get<std::size_t>());
    CHECK(param_bytes(spec, 0, i) == ref["prefix_param_bytes"][i].get<std::uint64_t>());
    CHECK(flops(spec, 0, i, 1) == ref["prefix_flops"][i].get<std::uint64_t>());
  }
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(param_count(spec.layers[i].kind) == ref["layer_params"][i].get<std::size_t>());
    CHECK(flops(spec, i, i + 1, 1) == ref["layer_flops"][i].get<std::uint64_t>());
  }
  CHECK(param_bytes(spec, 0, 4) + param_bytes(spec, 4, 10) == param_bytes(spec, 0, 10));
}

TEST_CASE("resmini forward and backward match the torch oracle") {
  const auto ref = reference()["torch"];
  const auto spec = resmini();
  auto params = ParameterSet::zeros(spec, 0, spec.layer_count());
  auto v = params.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = pattern_param(i);

  const std::size_t batch = ref["batch"];
  Tensor x(spec.input_shape.with_batch(batch));
  const std::size_t n = spec.input_shape.numel();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t i = 0; i < n; ++i) x[b * n + i] = pattern_input(b, i);
  }
  const auto labels = ref["labels"].get<std::vector<int>>();

  for (std::size_t c = 0; c <= spec.layer_count(); ++c) {
    const Tensor a = infer(spec, params, x, 0, c);
    const double sum = std::accumulate(a.values().begin(), a.values().end(), 0.0);
    CHECK(sum == doctest::Approx(ref["boundary_sums"][c].get<double>()).epsilon(1e-10));
  }

  auto fwd = forward(spec, params, x, 0, spec.layer_count());
  const auto logits = ref["logits"].get<std::vector<double>>();
  CHECK(rel_error(fwd.output.values(), logits) < 1e-12);
  const auto loss = softmax_cross_entropy(fwd.output, labels);
  CHECK(loss.loss == doctest::Approx(ref["loss"].get<double>()).epsilon(1e-12));

  const auto g = backward(spec, params, fwd.cache, loss.grad);
  const auto gv = g.params.values();
  double sum = 0.0;
  double abs_sum = 0.0;
  for (double e : gv) {
    sum += e;
    abs_sum += std::abs(e);
  }
  CHECK(sum == doctest::Approx(ref["grad_sum"].get<double>()).epsilon(1e-9));
  CHECK(abs_sum == doctest::Approx(ref["grad_abs_sum"].get<double>()).epsilon(1e-10));
  const auto idx = ref["grad_probe_index"].get<std::vector<std::size_t>>();
  const auto val = ref["grad_probe_value"].get<std::vector<double>>();
  for (std::size_t k = 0; k < idx.size(); ++k) {
    CHECK(gv[idx[k]] == doctest::Approx(val[k]).epsilon(1e-9).scale(1e-12));
  }
}

TEST_CASE("forward examples") {
  SUBCASE("identity dense") {
    const auto spec = make_model({Dense{2, 2}}, TensorShape{2}, 2);
    auto p = ParameterSet::zeros(spec, 0, 1);
    p.values()[0] = 1.0;
    p.values()[3] = 1.0;
    const Tensor y = infer(spec, p, Tensor(TensorShape{1, 2}, {3.0, -1.0}), 0, 1);
    CHECK(y[0] == 3.0);
    CHECK(y[1] == -1.0);
  }
  SUBCASE("relu") {
    const auto spec = make_model({Relu{}}, TensorShape{3}, 3);
    const Tensor y = infer(spec, ParameterSet::zeros(spec, 0, 1), Tensor(TensorShape{1, 3}, {-2.0, 0.0, 5.0}), 0, 1);
    CHECK(y == Tensor(TensorShape{1, 3}, {0.0, 0.0, 5.0}));
  }
  SUBCASE("all-ones 2x2 kernel sums windows") {
    const auto spec = make_model({Conv2d{1, 1, 2, 1, 0}, Flatten{}}, TensorShape{1, 3, 3}, 4);
    auto p = ParameterSet::zeros(spec, 0, 2);
    for (std::size_t i = 0; i < 4; ++i) p.values()[i] = 1.0;
    const Tensor x(TensorShape{1, 1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
    const Tensor y = infer(spec, p, x, 0, 1);
    CHECK(y == Tensor(TensorShape{1, 1, 2, 2}, {12, 16, 24, 28}));
  }
}

TEST_CASE("conv2d agrees with a nested-loop oracle") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t ci = test::pick(rng, 1, 3), co = test::pick(rng, 1, 3), k = test::pick(rng, 1, 3);
    const std::size_t s = test::pick(rng, 1, 3), pad = test::pick(rng, 0, 2);
    const std::size_t h = test::pick(rng, k, 7), w = test::pick(rng, k, 7), b = test::pick(rng, 1, 3);
    const Conv2d c{ci, co, k, s, pad};
    const std::size_t ho = (h + 2 * pad - k) / s + 1, wo = (w + 2 * pad - k) / s + 1;
    const auto spec = make_model({c, Flatten{}}, TensorShape{ci, h, w}, co * ho * wo);
    const auto p = random_params(spec, rng);
    const Tensor x = test::random_tensor(TensorShape{b, ci, h, w}, rng);
    const Tensor y = infer(spec, p, x, 0, 1);
    const auto wt = p.layer(0);
    for (std::size_t n = 0; n < b; ++n) {
      for (std::size_t o = 0; o < co; ++o) {
        for (std::size_t oy = 0; oy < ho; ++oy) {
          for (std::size_t ox = 0; ox < wo; ++ox) {
            double acc = wt[co * ci * k * k + o];
            for (std::size_t i = 0; i < ci; ++i) {
              for (std::size_t ky = 0; ky < k; ++ky) {
                for (std::size_t kx = 0; kx < k; ++kx) {
                  const long iy = static_cast<long>(oy * s + ky) - static_cast<long>(pad);
                  const long ix = static_cast<long>(ox * s + kx) - static_cast<long>(pad);
                  if (iy < 0 || ix < 0 || iy >= static_cast<long>(h) || ix >= static_cast<long>(w)) continue;
                  acc += wt[((o * ci + i) * k + ky) * k + kx] *
                         x[((n * ci + i) * h + static_cast<std::size_t>(iy)) * w + static_cast<std::size_t>(ix)];
                }
              }
            }
            CHECK(y[((n * co + o) * ho + oy) * wo + ox] == doctest::Approx(acc).epsilon(1e-12));
          }
        }
      }
    }
  }
}

TEST_CASE("backward examples") {
  const auto spec = make_model({Dense{1, 1}}, TensorShape{1}, 1);
  auto p = ParameterSet::zeros(spec, 0, 1);
  p.values()[0] = 2.0;
  auto fwd = forward(spec, p, Tensor(TensorShape{1, 1}, {3.0}), 0, 1);
  const auto g = backward(spec, p, fwd.cache, Tensor(TensorShape{1, 1}, {1.0}));
  CHECK(g.params.values()[0] == 3.0);
  CHECK(g.params.values()[1] == 1.0);
  CHECK(g.input[0] == 2.0);

  const auto r = make_model({Relu{}}, TensorShape{1}, 1);
  const auto rp = ParameterSet::zeros(r, 0, 1);
  auto rf = forward(r, rp, Tensor(TensorShape{1, 1}, {-2.0}), 0, 1);
  CHECK(backward(r, rp, rf.cache, Tensor(TensorShape{1, 1}, {1.0})).input[0] == 0.0);
}

TEST_CASE("backward rejects foreign or stale caches") {
  const auto a = make_model({Dense{3, 2}}, TensorShape{3}, 2);
  const auto b = make_model({Relu{}, Dense{3, 2}}, TensorShape{3}, 2);
  const auto pa = ParameterSet::zeros(a, 0, 1);
  const auto pb = ParameterSet::zeros(b, 0, 2);
  auto fa = forward(a, pa, Tensor(TensorShape{2, 3}), 0, 1);
  CHECK_THROWS_AS(backward(b, pb, fa.cache, Tensor(TensorShape{2, 2})), LayoutError);
  CHECK_THROWS_AS(backward(a, pa, fa.cache, Tensor(TensorShape{3, 2})), ShapeError);
  fa.cache.inputs[0] = Tensor(TensorShape{2, 4});
  CHECK_THROWS_AS(backward(a, pa, fa.cache, Tensor(TensorShape{2, 2})), LayoutError);
  CHECK_THROWS_AS(forward(a, pa, Tensor(TensorShape{2, 4}), 0, 1), ShapeError);
}

TEST_CASE("every layer kind passes central finite differences") {
  std::mt19937_64 rng(2024);
  for (std::size_t kind = 0; kind < test::kLayerKinds; ++kind) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto lc = test::random_layer(kind, rng);
      CAPTURE(describe(lc.kind));
      CAPTURE(lc.input.str());
      const auto fd = test::finite_difference_check(lc, rng);
      CHECK(fd.params < 1e-4);
      CHECK(fd.input < 1e-4);
    }
  }
}

TEST_CASE("softmax cross-entropy") {
  const auto u = softmax_cross_entropy(Tensor(TensorShape{1, 2}), std::vector<int>{1});
  CHECK(u.loss == doctest::Approx(std::log(2.0)));
  const auto e = softmax_cross_entropy(Tensor(TensorShape{1, 2}, {200.0, -200.0}), std::vector<int>{0});
  CHECK(e.loss < 1e-12);
  CHECK(e.loss >= 0.0);

  std::mt19937_64 rng(3);
  const Tensor logits = test::random_tensor(TensorShape{4, 3}, rng, -3, 3);
  const std::vector<int> labels{0, 2, 1, 2};
  const auto res = softmax_cross_entropy(logits, labels);
  double brute = 0.0;
  for (std::size_t r = 0; r < 4; ++r) {
    double z = 0.0;
    for (std::size_t c = 0; c < 3; ++c) z += std::exp(logits[r * 3 + c]);
    brute += -std::log(std::exp(logits[r * 3 + static_cast<std::size_t>(labels[r])]) / z);
    double row = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
      const double p = std::exp(logits[r * 3 + c]) / z;
      const double expect = (p - (static_cast<int>(c) == labels[r] ? 1.0 : 0.0)) / 4.0;
      CHECK(res.grad[r * 3 + c] == doctest::Approx(expect).epsilon(1e-12));
      row += res.grad[r * 3 + c];
    }
    CHECK(std::abs(row) < 1e-15);
  }
  CHECK(res.loss == doctest::Approx(brute / 4.0).epsilon(1e-12));
  CHECK_THROWS_AS(softmax_cross_entropy(logits, std::vector<int>{0, 3, 1, 2}), RangeError);
  CHECK_THROWS(softmax_cross_entropy(logits, std::vector<int>{0, 1}));
}

TEST_CASE("sgd") {
  const auto spec = make_model({Dense{1, 1}}, TensorShape{1}, 1);
  auto p = ParameterSet::zeros(spec, 0, 1);
  p.values()[0] = 1.0;
  auto g = ParameterSet::zeros_like(p);
  g.values()[0] = 2.0;
  CHECK(sgd_step(p, g, 0.0) == p);
  CHECK(sgd_step(p, g, 0.5).values()[0] == 0.0);
  const auto other = ParameterSet::zeros(make_model({Dense{2, 1}}, TensorShape{2}, 1), 0, 1);
  CHECK_THROWS_AS(sgd_step(p, other, 0.1), LayoutError);
}

TEST_CASE("param_bytes and flops accounting") {
  const auto d34 = make_model({Dense{3, 4}}, TensorShape{3}, 4);
  CHECK(param_bytes(d34, 0, 1) == 64);
  CHECK(param_bytes(d34, 0, 0) == 0);
  CHECK(flops(d34, 0, 1, 1) == 24);
  CHECK(backward_flops(d34, 0, 1, 1) == 48);
  CHECK_THROWS_AS(param_bytes(d34, 1, 0), RangeError);
  CHECK_THROWS_AS(flops(d34, 0, 2, 1), RangeError);

  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const auto spec = test::random_model(rng);
    const std::size_t L = spec.layer_count();
    const std::size_t c = test::pick(rng, 0, L);
    const std::size_t b = test::pick(rng, 1, 8);
    CHECK(flops(spec, 0, c, b) + flops(spec, c, L, b) == flops(spec, 0, L, b));
    CHECK(param_bytes(spec, 0, c) + param_bytes(spec, c, L) == param_bytes(spec, 0, L));
    CHECK(flops(spec, 0, L, b + 1) >= flops(spec, 0, L, b));
    CHECK(flops(spec, 0, L, b) == b * flops(spec, 0, L, 1));
  }
}

TEST_CASE("training trajectories are bitwise deterministic") {
  std::mt19937_64 rng(4);
  const auto spec = test::random_model(rng);
  auto run = [&] {
    std::mt19937_64 local(77);
    auto p = build_model(spec, 3);
    for (int step = 0; step < 5; ++step) {
      const Tensor x = test::random_tensor(spec.input_shape.with_batch(4), local);
      const auto labels = test::random_labels(4, spec.num_classes, local);
      auto fwd = forward(spec, p, x, 0, spec.layer_count());
      const auto loss = softmax_cross_entropy(fwd.output, labels);
      sgd_update(p, backward(spec, p, fwd.cache, loss.grad, false).params, 0.1);
    }
    return p;
  };
  CHECK(run() == run());
}
