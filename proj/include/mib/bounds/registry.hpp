/* Copyright 2026 The mib Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <span>
#include <string>
#include <string_view>

#include "mib/bounds/bounds.hpp"

namespace mib::bounds {

enum class Estimator {
  kTuba,
  kNwj,
  kDv,
  kMine,
  kInfonce,
  kInterpolated,
  kJs,
  kInfonceTractable,
  kLooUpper,
  kReparamNwj,
  kRate,
  kBa,
  kTcUpper,
};

struct EstimatorInfo {
  Estimator kind;
  std::string_view name;
  std::string_view summary;
  // Works on a critic's score matrix (as opposed to closed forms or
  // conditional matrices only).
  bool uses_critic;
  bool lower_bound;
};

std::span<const EstimatorInfo> estimator_table();
const EstimatorInfo& estimator_info(Estimator kind);
// Throws ConfigError for unknown names.
Estimator parse_estimator(std::string_view name);
InterpolationMode parse_mode(std::string_view name);

}  // namespace mib::bounds
