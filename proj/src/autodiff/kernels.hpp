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
#include <vector>

#include "mib/autodiff/tape.hpp"

namespace mib::ad::detail {

struct Forward {
  Shape shape;
  std::vector<double> values;
};

// Validates shapes/domains and evaluates the primitive.
Forward forward(Primitive op, std::span<const Tensor> inputs, const Attributes& attrs);

// Adds the vector-Jacobian product of `out_grad` into `input_grads[k]` for
// every k whose pointer is non-null (buffers sized like input k).
void vjp(Primitive op, std::span<const Tensor> inputs, const Tensor& output,
         std::span<const double> out_grad, const Attributes& attrs,
         std::span<std::vector<double>* const> input_grads);

Shape broadcast_shapes(const Shape& a, const Shape& b, Primitive op);

}  // namespace mib::ad::detail
