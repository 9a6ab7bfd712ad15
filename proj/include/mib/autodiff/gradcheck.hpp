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

#include <functional>
#include <vector>

#include "mib/autodiff/tensor.hpp"

namespace mib::ad {

// A scalar-valued function of one tensor. It is called once with a tape
// leaf (analytic pass) and repeatedly with plain constants (numeric pass).
using ScalarFunction = std::function<Tensor(const Tensor&)>;

struct GradientCheck {
  double max_relative_error = 0.0;
  std::vector<double> analytic;
  std::vector<double> numeric;
};

// Reverse-mode gradient vs central differences. The error per coordinate is
// |analytic - numeric| / (|numeric| + 1e-8); epsilon must lie in (0, 1e-3].
GradientCheck compare_gradient(const ScalarFunction& fn, const Tensor& point, double epsilon);

double check_gradient(const ScalarFunction& fn, const Tensor& point, double epsilon);

}  // namespace mib::ad
