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
#include <string>
#include <vector>

#include "asfl/errors.hpp"
#include "layers_impl.hpp"

namespace asfl::detail {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

[[noreturn]] void mismatch(std::size_t index, const LayerKind& kind, const std::string& expected,
                           const TensorShape& got) {
  throw ShapeError("shape mismatch at layer " + std::to_string(index) + " (" + describe(kind) + "): expected " +
                   expected + ", got " + got.str());
}

struct ConvGeometry {
  std::size_t in_ch, out_ch, kernel, stride, pad;
  std::size_t h, w, oh, ow;
};

ConvGeometry geometry(const Conv2d& c, const TensorShape& in_sample, const TensorShape& out_sample) {
  return {c.in_ch, c.out_ch, c.kernel, c.stride, c.pad, in_sample[1], in_sample[2], out_sample[1], out_sample[2]};
}

// Patch matrix for the whole batch: row (ic, kh, kw), column (b, oh, ow). Padding reads as 0.
std::vector<double> im2col(const ConvGeometry& g, const double* x, std::size_t batch) {
  const std::size_t in_plane = g.h * g.w;
  const std::size_t out_plane = g.oh * g.ow;
  const std::size_t n = batch * out_plane;
  std::vector<double> cols(g.in_ch * g.kernel * g.kernel * n, 0.0);
  for (std::size_t ic = 0; ic < g.in_ch; ++ic) {
    for (std::size_t kh = 0; kh < g.kernel; ++kh) {
      for (std::size_t kw = 0; kw < g.kernel; ++kw) {
        double* row = cols.data() + ((ic * g.kernel + kh) * g.kernel + kw) * n;
        for (std::size_t b = 0; b < batch; ++b) {
          const double* xi = x + (b * g.in_ch + ic) * in_plane;
          double* rb = row + b * out_plane;
          for (std::size_t oh = 0; oh < g.oh; ++oh) {
            const std::size_t r = oh * g.stride + kh;
            if (r < g.pad || r - g.pad >= g.h) continue;
            for (std::size_t ow = 0; ow < g.ow; ++ow) {
              const std::size_t c = ow * g.stride + kw;
              if (c < g.pad || c - g.pad >= g.w) continue;
              rb[oh * g.ow + ow] = xi[(r - g.pad) * g.w + (c - g.pad)];
            }
          }
        }
      }
    }
  }
  return cols;
}

// Adjoint of im2col: scatters patch gradients back onto dx.
void col2im(const ConvGeometry& g, const double* cols, double* dx, std::size_t batch) {
  const std::size_t in_plane = g.h * g.w;
  const std::size_t out_plane = g.oh * g.ow;
  const std::size_t n = batch * out_plane;
  for (std::size_t ic = 0; ic < g.in_ch; ++ic) {
    for (std::size_t kh = 0; kh < g.kernel; ++kh) {
      for (std::size_t kw = 0; kw < g.kernel; ++kw) {
        const double* row = cols + ((ic * g.kernel + kh) * g.kernel + kw) * n;
        for (std::size_t b = 0; b < batch; ++b) {
          double* dxi = dx + (b * g.in_ch + ic) * in_plane;
          const double* rb = row + b * out_plane;
          for (std::size_t oh = 0; oh < g.oh; ++oh) {
            const std::size_t r = oh * g.stride + kh;
            if (r < g.pad || r - g.pad >= g.h) continue;
            for (std::size_t ow = 0; ow < g.ow; ++ow) {
              const std::size_t c = ow * g.stride + kw;
              if (c < g.pad || c - g.pad >= g.w) continue;
              dxi[(r - g.pad) * g.w + (c - g.pad)] += rb[oh * g.ow + ow];
            }
          }
        }
      }
    }
  }
}

// y[b] (out_ch x oh x ow) = conv(x[b]) + bias, for every sample in the batch.
void conv_forward(const ConvGeometry& g, const double* w, const double* bias, const double* x, double* y,
                  std::size_t batch) {
  const std::size_t out_plane = g.oh * g.ow;
  const std::size_t n = batch * out_plane;
  const std::size_t k = g.in_ch * g.kernel * g.kernel;
  const auto cols = im2col(g, x, batch);
  std::vector<double> out(g.out_ch * n);
  for (std::size_t oc = 0; oc < g.out_ch; ++oc) {
    double* o = out.data() + oc * n;
    std::fill(o, o + n, bias[oc]);
    for (std::size_t r = 0; r < k; ++r) {
      const double wv = w[oc * k + r];
      const double* c = cols.data() + r * n;
      for (std::size_t j = 0; j < n; ++j) o[j] += wv * c[j];
    }
  }
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t oc = 0; oc < g.out_ch; ++oc) {
      const double* o = out.data() + oc * n + b * out_plane;
      std::copy(o, o + out_plane, y + (b * g.out_ch + oc) * out_plane);
    }
  }
}

void conv_backward(const ConvGeometry& g, const double* w, const double* x, const double* dy, double* dw, double* db,
                   double* dx, std::size_t batch) {
  const std::size_t out_plane = g.oh * g.ow;
  const std::size_t n = batch * out_plane;
  const std::size_t k = g.in_ch * g.kernel * g.kernel;
  std::vector<double> d(g.out_ch * n);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t oc = 0; oc < g.out_ch; ++oc) {
      const double* src = dy + (b * g.out_ch + oc) * out_plane;
      std::copy(src, src + out_plane, d.data() + oc * n + b * out_plane);
    }
  }
  const auto cols = im2col(g, x, batch);
  for (std::size_t oc = 0; oc < g.out_ch; ++oc) {
    const double* dr = d.data() + oc * n;
    double bias_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) bias_sum += dr[j];
    db[oc] += bias_sum;
    for (std::size_t r = 0; r < k; ++r) {
      const double* c = cols.data() + r * n;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += dr[j] * c[j];
      dw[oc * k + r] += acc;
    }
  }
  if (!dx) return;
  std::vector<double> dcols(k * n, 0.0);
  for (std::size_t oc = 0; oc < g.out_ch; ++oc) {
    const double* dr = d.data() + oc * n;
    for (std::size_t r = 0; r < k; ++r) {
      const double wv = w[oc * k + r];
      double* dc = dcols.data() + r * n;
      for (std::size_t j = 0; j < n; ++j) dc[j] += wv * dr[j];
    }
  }
  col2im(g, dcols.data(), dx, batch);
}

std::size_t conv_weights(const Conv2d& c) { return c.out_ch * c.in_ch * c.kernel * c.kernel; }

Conv2d residual_conv(std::size_t channels) { return Conv2d{channels, channels, 3, 1, 1}; }

std::uint64_t conv_flops(const Conv2d& c, const TensorShape& out_sample) {
  return 2ULL * c.kernel * c.kernel * c.in_ch * c.out_ch * out_sample[1] * out_sample[2];
}

}  // namespace

TensorShape output_shape(const LayerKind& kind, const TensorShape& in, std::size_t index) {
  return std::visit(
      overloaded{
          [&](const Dense& d) -> TensorShape {
            if (in.numel() != d.in) mismatch(index, kind, std::to_string(d.in) + " input features", in);
            return TensorShape{d.out};
          },
          [&](const Conv2d& c) -> TensorShape {
            if (in.rank() != 3 || in[0] != c.in_ch) {
              mismatch(index, kind, std::to_string(c.in_ch) + "xHxW", in);
            }
            if (in[1] + 2 * c.pad < c.kernel || in[2] + 2 * c.pad < c.kernel) {
              mismatch(index, kind, "spatial extent >= kernel", in);
            }
            return TensorShape{c.out_ch, (in[1] + 2 * c.pad - c.kernel) / c.stride + 1,
                               (in[2] + 2 * c.pad - c.kernel) / c.stride + 1};
          },
          [&](const Relu&) -> TensorShape { return in; },
          [&](const MaxPool& p) -> TensorShape {
            if (in.rank() != 3 || in[1] < p.kernel || in[2] < p.kernel) mismatch(index, kind, "CxHxW with H,W >= kernel", in);
            return TensorShape{in[0], (in[1] - p.kernel) / p.stride + 1, (in[2] - p.kernel) / p.stride + 1};
          },
          [&](const AvgPoolGlobal&) -> TensorShape {
            if (in.rank() != 3) mismatch(index, kind, "CxHxW", in);
            return TensorShape{in[0]};
          },
          [&](const Flatten&) -> TensorShape { return TensorShape{in.numel()}; },
          [&](const ResidualBlock& r) -> TensorShape {
            if (in.rank() != 3 || in[0] != r.channels) mismatch(index, kind, std::to_string(r.channels) + "xHxW", in);
            return in;
          },
      },
      kind);
}

std::uint64_t forward_flops(const LayerKind& kind, const TensorShape& in) {
  return std::visit(overloaded{
                        [&](const Dense& d) -> std::uint64_t { return 2ULL * d.in * d.out; },
                        [&](const Conv2d& c) -> std::uint64_t { return conv_flops(c, output_shape(kind, in, 0)); },
                        [&](const Relu&) -> std::uint64_t { return in.numel(); },
                        [&](const MaxPool&) -> std::uint64_t { return in.numel(); },
                        [&](const AvgPoolGlobal&) -> std::uint64_t { return in.numel(); },
                        [&](const Flatten&) -> std::uint64_t { return 0; },
                        [&](const ResidualBlock& r) -> std::uint64_t {
                          return 2 * conv_flops(residual_conv(r.channels), in) + 3ULL * in.numel();
                        },
                    },
                    kind);
}

std::vector<WeightBlock> weight_blocks(const LayerKind& kind) {
  return std::visit(overloaded{
                        [](const Dense& d) -> std::vector<WeightBlock> { return {{d.in, d.out, d.in * d.out, d.out}}; },
                        [](const Conv2d& c) -> std::vector<WeightBlock> {
                          const auto area = c.kernel * c.kernel;
                          return {{c.in_ch * area, c.out_ch * area, conv_weights(c), c.out_ch}};
                        },
                        [](const ResidualBlock& r) -> std::vector<WeightBlock> {
                          const auto c = residual_conv(r.channels);
                          WeightBlock wb{c.in_ch * 9, c.out_ch * 9, conv_weights(c), c.out_ch};
                          return {wb, wb};
                        },
                        [](const auto&) -> std::vector<WeightBlock> { return {}; },
                    },
                    kind);
}

void layer_forward(const LayerKind& kind, std::span<const double> p, const Tensor& x, Tensor& y,
                   const TensorShape& y_sample, LayerState& state) {
  const std::size_t batch = x.shape()[0];
  y = Tensor(y_sample.with_batch(batch));
  const TensorShape x_sample = x.shape().sample();

  std::visit(
      overloaded{
          [&](const Dense& d) {
            const double* w = p.data();
            const double* bias = p.data() + d.in * d.out;
            for (std::size_t b = 0; b < batch; ++b) {
              const double* xb = x.data() + b * d.in;
              double* yb = y.data() + b * d.out;
              for (std::size_t o = 0; o < d.out; ++o) {
                const double* wo = w + o * d.in;
                double acc = 0.0;
                for (std::size_t i = 0; i < d.in; ++i) acc += wo[i] * xb[i];
                yb[o] = acc + bias[o];
              }
            }
          },
          [&](const Conv2d& c) {
            conv_forward(geometry(c, x_sample, y_sample), p.data(), p.data() + conv_weights(c), x.data(), y.data(),
                         batch);
          },
          [&](const Relu&) {
            for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
          },
          [&](const MaxPool& mp) {
            const std::size_t ch = x_sample[0], h = x_sample[1], w = x_sample[2];
            const std::size_t oh = y_sample[1], ow = y_sample[2];
            state.argmax.assign(y.size(), 0);
            for (std::size_t b = 0; b < batch; ++b) {
              for (std::size_t c = 0; c < ch; ++c) {
                const std::size_t in_base = (b * ch + c) * h * w;
                const std::size_t out_base = (b * ch + c) * oh * ow;
                for (std::size_t i = 0; i < oh; ++i) {
                  for (std::size_t j = 0; j < ow; ++j) {
                    std::size_t best = in_base + (i * mp.stride) * w + j * mp.stride;
                    for (std::size_t ki = 0; ki < mp.kernel; ++ki) {
                      for (std::size_t kj = 0; kj < mp.kernel; ++kj) {
                        const std::size_t idx = in_base + (i * mp.stride + ki) * w + j * mp.stride + kj;
                        if (x[idx] > x[best]) best = idx;
                      }
                    }
                    y[out_base + i * ow + j] = x[best];
                    state.argmax[out_base + i * ow + j] = best;
                  }
                }
              }
            }
          },
          [&](const AvgPoolGlobal&) {
            const std::size_t ch = x_sample[0], plane = x_sample[1] * x_sample[2];
            for (std::size_t b = 0; b < batch; ++b) {
              for (std::size_t c = 0; c < ch; ++c) {
                const double* xc = x.data() + (b * ch + c) * plane;
                double acc = 0.0;
                for (std::size_t i = 0; i < plane; ++i) acc += xc[i];
                y[b * ch + c] = acc / static_cast<double>(plane);
              }
            }
          },
          [&](const Flatten&) { std::copy(x.values().begin(), x.values().end(), y.values().begin()); },
          [&](const ResidualBlock& r) {
            const Conv2d conv = residual_conv(r.channels);
            const auto g = geometry(conv, x_sample, y_sample);
            const std::size_t nw = conv_weights(conv);
            const double* w1 = p.data();
            const double* b1 = w1 + nw;
            const double* w2 = b1 + r.channels;
            const double* b2 = w2 + nw;

            Tensor h1(x.shape());
            conv_forward(g, w1, b1, x.data(), h1.data(), batch);
            Tensor a1(x.shape());
            for (std::size_t i = 0; i < h1.size(); ++i) a1[i] = h1[i] > 0.0 ? h1[i] : 0.0;
            Tensor s(x.shape());
            conv_forward(g, w2, b2, a1.data(), s.data(), batch);
            for (std::size_t i = 0; i < s.size(); ++i) {
              s[i] += x[i];
              y[i] = s[i] > 0.0 ? s[i] : 0.0;
            }
            state.saved.clear();
            state.saved.push_back(std::move(h1));
            state.saved.push_back(std::move(s));
          },
      },
      kind);
}

void layer_backward(const LayerKind& kind, std::span<const double> p, const Tensor& x,
                    const std::vector<Tensor>& saved, const std::vector<std::size_t>& argmax, const Tensor& dy,
                    std::span<double> dp, Tensor* dx) {
  const std::size_t batch = x.shape()[0];
  const TensorShape x_sample = x.shape().sample();
  const TensorShape y_sample = dy.shape().sample();
  if (dx) *dx = Tensor(x.shape());

  std::visit(
      overloaded{
          [&](const Dense& d) {
            const double* w = p.data();
            double* dw = dp.data();
            double* db = dp.data() + d.in * d.out;
            for (std::size_t b = 0; b < batch; ++b) {
              const double* xb = x.data() + b * d.in;
              const double* dyb = dy.data() + b * d.out;
              double* dxb = dx ? dx->data() + b * d.in : nullptr;
              for (std::size_t o = 0; o < d.out; ++o) {
                const double g = dyb[o];
                db[o] += g;
                double* dwo = dw + o * d.in;
                for (std::size_t i = 0; i < d.in; ++i) dwo[i] += g * xb[i];
                if (dxb) {
                  const double* wo = w + o * d.in;
                  for (std::size_t i = 0; i < d.in; ++i) dxb[i] += wo[i] * g;
                }
              }
            }
          },
          [&](const Conv2d& c) {
            const std::size_t nw = conv_weights(c);
            conv_backward(geometry(c, x_sample, y_sample), p.data(), x.data(), dy.data(), dp.data(), dp.data() + nw,
                          dx ? dx->data() : nullptr, batch);
          },
          [&](const Relu&) {
            if (!dx) return;
            for (std::size_t i = 0; i < x.size(); ++i) (*dx)[i] = x[i] > 0.0 ? dy[i] : 0.0;
          },
          [&](const MaxPool&) {
            if (!dx) return;
            for (std::size_t i = 0; i < dy.size(); ++i) (*dx)[argmax[i]] += dy[i];
          },
          [&](const AvgPoolGlobal&) {
            if (!dx) return;
            const std::size_t ch = x_sample[0], plane = x_sample[1] * x_sample[2];
            const double scale = 1.0 / static_cast<double>(plane);
            for (std::size_t b = 0; b < batch; ++b) {
              for (std::size_t c = 0; c < ch; ++c) {
                const double g = dy[b * ch + c] * scale;
                double* dxc = dx->data() + (b * ch + c) * plane;
                for (std::size_t i = 0; i < plane; ++i) dxc[i] = g;
              }
            }
          },
          [&](const Flatten&) {
            if (dx) std::copy(dy.values().begin(), dy.values().end(), dx->values().begin());
          },
          [&](const ResidualBlock& r) {
            const Conv2d conv = residual_conv(r.channels);
            const auto g = geometry(conv, x_sample, y_sample);
            const std::size_t nw = conv_weights(conv);
            const double* w1 = p.data();
            const double* w2 = w1 + nw + r.channels;
            double* dw1 = dp.data();
            double* db1 = dw1 + nw;
            double* dw2 = db1 + r.channels;
            double* db2 = dw2 + nw;

            const Tensor& h1 = saved.at(0);
            const Tensor& s = saved.at(1);

            Tensor ds(x.shape());
            for (std::size_t i = 0; i < ds.size(); ++i) ds[i] = s[i] > 0.0 ? dy[i] : 0.0;
            Tensor a1(x.shape());
            for (std::size_t i = 0; i < a1.size(); ++i) a1[i] = h1[i] > 0.0 ? h1[i] : 0.0;
            Tensor da1(x.shape());
            conv_backward(g, w2, a1.data(), ds.data(), dw2, db2, da1.data(), batch);
            for (std::size_t i = 0; i < da1.size(); ++i) {
              if (h1[i] <= 0.0) da1[i] = 0.0;
            }
            conv_backward(g, w1, x.data(), da1.data(), dw1, db1, dx ? dx->data() : nullptr, batch);
            if (dx) {
              for (std::size_t i = 0; i < ds.size(); ++i) (*dx)[i] += ds[i];
            }
          },
      },
      kind);
}

}  // namespace asfl::detail
