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

#include "asfl/reference_models.hpp"

#include "asfl/errors.hpp"

namespace asfl {

ModelSpec resmini(std::size_t num_classes) {
  return make_model(
      {
          Conv2d{1, 4, 3, 1, 1},
          Conv2d{4, 8, 3, 2, 1},
          ResidualBlock{8},
          Conv2d{8, 16, 3, 2, 1},
          ResidualBlock{16},
          Conv2d{16, 32, 3, 2, 1},
          ResidualBlock{32},
          Conv2d{32, 64, 3, 2, 1},
          ResidualBlock{64},
          Dense{64, num_classes},
      },
      TensorShape{1, 16, 16}, num_classes);
}

ModelSpec mlp(std::size_t num_classes) {
  return make_model({Flatten{}, Dense{256, 32}, Relu{}, Dense{32, num_classes}}, TensorShape{1, 16, 16}, num_classes);
}

ModelSpec linear(std::size_t num_classes) {
  return make_model({Flatten{}, Dense{256, num_classes}}, TensorShape{1, 16, 16}, num_classes);
}

ModelSpec model_by_name(const std::string& name, std::size_t num_classes) {
  if (name == "resmini") return resmini(num_classes);
  if (name == "mlp") return mlp(num_classes);
  if (name == "linear") return linear(num_classes);
  throw ConfigError("model", "unknown reference model '" + name + "'");
}

std::vector<std::string> reference_model_names() { return {"resmini", "mlp", "linear"}; }

}  // namespace asfl
