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

#include "mib/autodiff/tape.hpp"
#include "mib/autodiff/tensor.hpp"

namespace mib::ad {

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor subtract(const Tensor& a, const Tensor& b);
Tensor multiply(const Tensor& a, const Tensor& b);
Tensor divide(const Tensor& a, const Tensor& b);

Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);
Tensor negate(const Tensor& x);
Tensor relu(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor softplus(const Tensor& x);
Tensor sqrt(const Tensor& x);
Tensor square(const Tensor& x);
Tensor clamp(const Tensor& x, double lo, double hi);

// axis = -1 reduces everything to a scalar.
Tensor sum(const Tensor& x, int axis = -1);
Tensor mean(const Tensor& x, int axis = -1);
// Max-shifted: m + log(sum(exp(x - m))).
Tensor log_sum_exp(const Tensor& x, int axis = -1);
// Max-shifted: m + log(mean(exp(x - m))).
Tensor log_mean_exp(const Tensor& x, int axis = -1);
// log_sum_exp over the entries whose mask value is nonzero.
Tensor masked_log_sum_exp(const Tensor& x, const Tensor& mask, int axis = -1);

Tensor diag(const Tensor& x);
Tensor broadcast_to(const Tensor& x, Shape shape);
Tensor reshape(const Tensor& x, Shape shape);
Tensor transpose(const Tensor& x);
Tensor concat(std::span<const Tensor> parts, int axis);
// Row i * x.rows + j of the result is [x_j, y_i].
Tensor pair_concat(const Tensor& x, const Tensor& y);
Tensor stop_gradient(const Tensor& x);

// (K) -> (K, 1).
Tensor as_column(const Tensor& x);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return subtract(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return multiply(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return divide(a, b); }
inline Tensor operator-(const Tensor& x) { return negate(x); }

inline Tensor operator+(const Tensor& a, double b) { return add(a, Tensor::scalar(b)); }
inline Tensor operator+(double a, const Tensor& b) { return add(Tensor::scalar(a), b); }
inline Tensor operator-(const Tensor& a, double b) { return subtract(a, Tensor::scalar(b)); }
inline Tensor operator-(double a, const Tensor& b) { return subtract(Tensor::scalar(a), b); }
inline Tensor operator*(const Tensor& a, double b) { return multiply(a, Tensor::scalar(b)); }
inline Tensor operator*(double a, const Tensor& b) { return multiply(Tensor::scalar(a), b); }
inline Tensor operator/(const Tensor& a, double b) { return divide(a, Tensor::scalar(b)); }
inline Tensor operator/(double a, const Tensor& b) { return divide(Tensor::scalar(a), b); }

}  // namespace mib::ad
