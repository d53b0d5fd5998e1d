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

#include <stdexcept>
#include <string>

namespace asfl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Layer shapes do not compose, or a tensor does not match the expected boundary shape.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Index, cut or boundary range outside the valid domain.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Parameter slices whose layouts cannot be combined.
class LayoutError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

// Invalid run configuration. The message always starts with the offending field name.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : Error(field + ": " + what), field_(field) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace asfl
