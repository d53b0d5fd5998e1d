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

#include <string>
#include <vector>

#include "asfl/model.hpp"

namespace asfl {

/// Ten-layer residual network on 1x16x16 inputs with 9 interior split points:
///
///   0 conv(1->4, s1)   1024   |  5 conv(16->32, s2)   128
///   1 conv(4->8, s2)    512   |  6 residual(32)        128
///   2 residual(8)       512   |  7 conv(32->64, s2)     64
///   3 conv(8->16, s2)   256   |  8 residual(64)         64
///   4 residual(16)      256   |  9 dense(64->10)
///
/// (numbers are per-sample activation sizes after each layer). Activation size
/// shrinks strictly across boundaries 1, 2, 4, 6, 8 while parameters concentrate
/// in the last blocks, so later cuts trade less exchange traffic for less offloading.
ModelSpec resmini(std::size_t num_classes = 10);

/// flatten -> dense(256, 32) -> relu -> dense(32, classes), for 1x16x16 inputs.
ModelSpec mlp(std::size_t num_classes = 10);

/// flatten -> dense(256, classes).
ModelSpec linear(std::size_t num_classes = 10);

/// Looks up a reference model by name ("resmini", "mlp", "linear"); throws ConfigError otherwise.
ModelSpec model_by_name(const std::string& name, std::size_t num_classes = 10);

std::vector<std::string> reference_model_names();

}  // namespace asfl
