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

#include "mib/autodiff/ops.hpp"

#include <array>

#include "mib/errors.hpp"

namespace mib::ad {
namespace {

Tensor unary(Primitive op, const Tensor& x, const Attributes& attrs = {}) {
  const std::array<Tensor, 1> in{x};
  return apply_primitive(op, in, attrs);
}

Tensor binary(Primitive op, const Tensor& a, const Tensor& b, const Attributes& attrs = {}) {
  const std::array<Tensor, 2> in{a, b};
  return apply_primitive(op, in, attrs);
}

Attributes on_axis(int axis) {
  Attributes a;
  a.axis = axis;
  return a;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) { return binary(Primitive::kMatMul, a, b); }
Tensor add(const Tensor& a, const Tensor& b) { return binary(Primitive::kAdd, a, b); }
Tensor subtract(const Tensor& a, const Tensor& b) { return binary(Primitive::kSubtract, a, b); }
Tensor multiply(const Tensor& a, const Tensor& b) { return binary(Primitive::kMultiply, a, b); }
Tensor divide(const Tensor& a, const Tensor& b) { return binary(Primitive::kDivide, a, b); }

Tensor exp(const Tensor& x) { return unary(Primitive::kExp, x); }
Tensor log(const Tensor& x) { return unary(Primitive::kLog, x); }
Tensor negate(const Tensor& x) { return unary(Primitive::kNegate, x); }
Tensor relu(const Tensor& x) { return unary(Primitive::kRelu, x); }
Tensor tanh(const Tensor& x) { return unary(Primitive::kTanh, x); }
Tensor softplus(const Tensor& x) { return unary(Primitive::kSoftplus, x); }
Tensor sqrt(const Tensor& x) { return unary(Primitive::kSqrt, x); }
Tensor square(const Tensor& x) { return unary(Primitive::kSquare, x); }

Tensor clamp(const Tensor& x, double lo, double hi) {
  Attributes a;
  a.lo = lo;
  a.hi = hi;
  return unary(Primitive::kClamp, x, a);
}

Tensor sum(const Tensor& x, int axis) { return unary(Primitive::kReduceSum, x, on_axis(axis)); }
Tensor mean(const Tensor& x, int axis) { return unary(Primitive::kReduceMean, x, on_axis(axis)); }
Tensor log_sum_exp(const Tensor& x, int axis) {
  return unary(Primitive::kLogSumExp, x, on_axis(axis));
}
Tensor log_mean_exp(const Tensor& x, int axis) {
  return unary(Primitive::kLogMeanExp, x, on_axis(axis));
}
Tensor masked_log_sum_exp(const Tensor& x, const Tensor& mask, int axis) {
  if (mask.requires_grad()) throw TapeError("masked_log_sum_exp: mask must be a constant");
  return binary(Primitive::kMaskedLogSumExp, x, mask, on_axis(axis));
}

Tensor diag(const Tensor& x) { return unary(Primitive::kDiag, x); }

Tensor broadcast_to(const Tensor& x, Shape shape) {
  Attributes a;
  a.shape = std::move(shape);
  return unary(Primitive::kBroadcastTo, x, a);
}

Tensor reshape(const Tensor& x, Shape shape) {
  Attributes a;
  a.shape = std::move(shape);
  return unary(Primitive::kReshape, x, a);
}

Tensor transpose(const Tensor& x) { return unary(Primitive::kTranspose, x); }

Tensor concat(std::span<const Tensor> parts, int axis) {
  return apply_primitive(Primitive::kConcat, parts, on_axis(axis));
}

Tensor pair_concat(const Tensor& x, const Tensor& y) {
  return binary(Primitive::kPairConcat, x, y);
}

Tensor stop_gradient(const Tensor& x) { return unary(Primitive::kStopGradient, x); }

Tensor as_column(const Tensor& x) { return reshape(x, {x.size(), 1}); }

}  // namespace mib::ad
