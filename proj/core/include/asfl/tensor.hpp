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

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace asfl {

/// Dimensions of a tensor, batch extent first when the tensor holds a batch.
class TensorShape {
 public:
  TensorShape() = default;
  TensorShape(std::initializer_list<std::size_t> dims);
  explicit TensorShape(std::vector<std::size_t> dims);

  std::size_t rank() const noexcept { return dims_.size(); }
  std::size_t numel() const noexcept;
  std::size_t operator[](std::size_t i) const { return dims_.at(i); }
  const std::vector<std::size_t>& dims() const noexcept { return dims_; }

  /// Prepends a batch extent to a per-sample shape.
  TensorShape with_batch(std::size_t batch) const;
  /// Drops the leading (batch) extent.
  TensorShape sample() const;

  std::string str() const;

  bool operator==(const TensorShape&) const = default;

 private:
  std::vector<std::size_t> dims_;
};

/// Dense row-major tensor of doubles.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(TensorShape shape, double fill = 0.0);
  Tensor(TensorShape shape, std::vector<double> values);

  const TensorShape& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  /// Same values, different shape of equal element count.
  Tensor reshaped(TensorShape shape) const;

  bool operator==(const Tensor&) const = default;

 private:
  TensorShape shape_;
  std::vector<double> data_;
};

}  // namespace asfl
