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

#include "mib/bounds/registry.hpp"

#include <array>

#include "mib/errors.hpp"

namespace mib::bounds {
namespace {

constexpr std::array<EstimatorInfo, 13> kTable{{
    {Estimator::kTuba, "tuba", "mean f - E[e^f / a(y) + log a(y) - 1]; baseline a(y)", true, true},
    {Estimator::kNwj, "nwj", "tuba with a(y) = e (f-GAN KL)", true, true},
    {Estimator::kDv, "dv", "Donsker-Varadhan; evaluation only, not a bound on finite batches", true, false},
    {Estimator::kMine, "mine", "dv estimate, tuba gradient with an EMA baseline", true, false},
    {Estimator::kInfonce, "infonce", "multi-sample contrastive bound, capped at log K", true, true},
    {Estimator::kInterpolated, "interpolated", "InfoNCE/NWJ interpolation; options alpha, mode", true, true},
    {Estimator::kJs, "js", "trained with f-GAN JS, reported as NWJ with critic 1 + V", true, true},
    {Estimator::kInfonceTractable, "infonce_tractable", "InfoNCE with the known conditional", false, true},
    {Estimator::kLooUpper, "loo_upper", "leave-one-out upper bound from the known conditional", false, false},
    {Estimator::kReparamNwj, "reparam_nwj", "NWJ with critic 1 + log p(y|x) - log q(y)", false, true},
    {Estimator::kRate, "rate", "closed-form rate upper bound against a diagonal Gaussian q(y)", false, false},
    {Estimator::kBa, "ba", "Barber-Agakov lower bound with a linear-Gaussian decoder", false, true},
    {Estimator::kTcUpper, "tc_upper", "total correlation: per-dimension uppers minus a joint lower", false, false},
}};

}  // namespace

std::span<const EstimatorInfo> estimator_table() { return kTable; }

const EstimatorInfo& estimator_info(Estimator kind) { return kTable[static_cast<std::size_t>(kind)]; }

Estimator parse_estimator(std::string_view name) {
  for (const auto& e : kTable) {
    if (e.name == name) return e.kind;
  }
  throw ConfigError("unknown estimator '" + std::string(name) + "'");
}

InterpolationMode parse_mode(std::string_view name) {
  for (auto m : {InterpolationMode::kMixture, InterpolationMode::kLinear, InterpolationMode::kProduct}) {
    if (mode_name(m) == name) return m;
  }
  throw ConfigError("unknown interpolation mode '" + std::string(name) + "'");
}

}  // namespace mib::bounds
