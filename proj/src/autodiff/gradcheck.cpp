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

#include "mib/autodiff/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "mib/autodiff/tape.hpp"
#include "mib/errors.hpp"

namespace mib::ad {

GradientCheck compare_gradient(const ScalarFunction& fn, const Tensor& point, double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1e-3)) {
    throw DomainError("check_gradient: epsilon must lie in (0, 1e-3]");
  }
  GradientCheck result;
  {
    Tape tape;
    const Tensor x = tape.leaf(point);
    const Tensor loss = fn(x);
    if (loss.size() != 1) throw ShapeError("check_gradient: function is not scalar-valued");
    if (!loss.requires_grad()) {
      result.analytic.assign(point.size(), 0.0);
    } else {
      const auto grads = tape.backward(loss);
      const auto g = grads.at(x).values();
      result.analytic.assign(g.begin(), g.end());
    }
  }

  Tensor probe = point.detach();
  auto v = probe.mutable_values();
  result.numeric.resize(point.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double saved = v[i];
    v[i] = saved + epsilon;
    const double up = fn(probe).item();
    v[i] = saved - epsilon;
    const double down = fn(probe).item();
    v[i] = saved;
    result.numeric[i] = (up - down) / (2.0 * epsilon);
  }

  for (std::size_t i = 0; i < v.size(); ++i) {
    const double a = result.analytic[i];
    const double n = result.numeric[i];
    if (!std::isfinite(a) || !std::isfinite(n)) {
      throw NumericError("check_gradient: non-finite gradient at coordinate " + std::to_string(i));
    }
    result.max_relative_error =
        std::max(result.max_relative_error, std::abs(a - n) / (std::abs(n) + 1e-8));
  }
  return result;
}

double check_gradient(const ScalarFunction& fn, const Tensor& point, double epsilon) {
  return compare_gradient(fn, point, epsilon).max_relative_error;
}

}  // namespace mib::ad
