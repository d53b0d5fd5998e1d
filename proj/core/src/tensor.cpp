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

#include "asfl/tensor.hpp"

#include <functional>
#include <numeric>
#include <utility>

#include "asfl/errors.hpp"

namespace asfl {

namespace {

void check_dims(const std::vector<std::size_t>& dims) {
  if (dims.empty()) throw ShapeError("tensor shape must have rank >= 1");
  for (auto d : dims) {
    if (d == 0) throw ShapeError("tensor shape extents must be >= 1");
  }
}

}  // namespace

TensorShape::TensorShape(std::initializer_list<std::size_t> dims) : dims_(dims) {
  check_dims(dims_);
}

TensorShape::TensorShape(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  check_dims(dims_);
}

std::size_t TensorShape::numel() const noexcept {
  if (dims_.empty()) return 0;
  return std::accumulate(dims_.begin(), dims_.end(), std::size_t{1}, std::multiplies<>());
}

TensorShape TensorShape::with_batch(std::size_t batch) const {
  std::vector<std::size_t> dims;
  dims.reserve(dims_.size() + 1);
  dims.push_back(batch);
  dims.insert(dims.end(), dims_.begin(), dims_.end());
  return TensorShape(std::move(dims));
}

TensorShape TensorShape::sample() const {
  if (dims_.size() < 2) throw ShapeError("cannot drop batch extent of rank-" + std::to_string(dims_.size()) + " shape");
  return TensorShape(std::vector<std::size_t>(dims_.begin() + 1, dims_.end()));
}

std::string TensorShape::str() const {
  std::string out;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (i) out += 'x';
    out += std::to_string(dims_[i]);
  }
  return out.empty() ? "()" : out;
}

Tensor::Tensor(TensorShape shape, double fill) : shape_(std::move(shape)), data_(shape_.numel(), fill) {}

Tensor::Tensor(TensorShape shape, std::vector<double> values) : shape_(std::move(shape)), data_(std::move(values)) {
  if (data_.size() != shape_.numel()) {
    throw ShapeError("tensor of shape " + shape_.str() + " needs " + std::to_string(shape_.numel()) +
                     " values, got " + std::to_string(data_.size()));
  }
}

Tensor Tensor::reshaped(TensorShape shape) const {
  if (shape.numel() != data_.size()) {
    throw ShapeError("cannot reshape " + shape_.str() + " into " + shape.str());
  }
  return Tensor(std::move(shape), data_);
}

}  // namespace asfl
