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

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

#include "mib/autodiff/tensor.hpp"
#include "mib/toy/distributions.hpp"

namespace mib::bounds {

// Exponent arguments of linear-domain exp terms are clamped to +-kExpClamp.
inline constexpr double kExpClamp = 50.0;

struct Diagnostics {
  // Off-diagonal exponent arguments that hit the clamp.
  std::size_t clamp_count = 0;
  // Capped bounds: the estimate is within 1% of its cap (log K for
  // InfoNCE). Uncapped bounds: some exponent argument was clamped.
  bool saturated = false;
  // Reported for monitoring only; not a bound (dv) or trained through a
  // different objective (js, mine).
  bool evaluation_only = false;
  // Holds only in expectation; single batches may fall on either side.
  bool expectation_only = false;
  std::optional<double> dv_value;
  std::optional<double> tuba_value;
  // log of the off-diagonal mean of exp(S); feeds the MINE moving average.
  std::optional<double> log_mean_exp_offdiag;
};

struct BoundResult {
  double estimate = 0.0;
  // Scalar, maximized during training; on the tape when S is.
  ad::Tensor objective;
  Diagnostics diagnostics;
};

// kMixture and kProduct put alpha m(y) + (1 - alpha) q(y), or m^alpha q^(1 - alpha),
// in the denominator; kLinear averages infonce with the q-baseline NWJ form.
enum class InterpolationMode { kMixture, kLinear, kProduct };
std::string_view mode_name(InterpolationMode mode);

// S is K x K with S[i, j] = f(x_j, y_i); the diagonal holds joint pairs.
// Product-of-marginals averages use the K(K-1) off-diagonal entries.
BoundResult tuba(const ad::Tensor& s, const ad::Tensor& log_a);
BoundResult nwj(const ad::Tensor& s);
BoundResult dv(const ad::Tensor& s);
// Objective is tuba with log a = stop_gradient(log ema_state); estimate is
// the dv value. A missing state is initialized from this batch.
BoundResult mine(const ad::Tensor& s, std::optional<double> ema_state);
BoundResult infonce(const ad::Tensor& s);
BoundResult interpolated(const ad::Tensor& s, const ad::Tensor& log_q, double alpha,
                         InterpolationMode mode = InterpolationMode::kMixture);
BoundResult js(const ad::Tensor& s);

// C[i, j] = log p(y_i | x_j) from a joint batch.
BoundResult infonce_tractable(const ad::Tensor& c);
BoundResult loo_upper(const ad::Tensor& c);
// NWJ with the reparameterized critic 1 + C - log q; diag(C) supplies
// log p(y_i | x_i).
BoundResult reparam_nwj(const ad::Tensor& c, const ad::Tensor& log_q);

// E_x KL(p(y|x) || N(0, diag q_variances)), in closed form.
double rate_upper(const toy::GaussianPairSpec& spec, std::span<const double> q_variances);

// E_x KL(p(y_dim | x) || N(0, q_variance)) for a linear-Gaussian encoder.
// With q_variance = Var(y_dim) this is I(X; Y_dim) exactly.
double rate_upper_dim(const toy::LinearGaussianEncoder& encoder, std::size_t dim, double q_variance);

// q(x | y) = N(A y, diag(s^2)).
struct LinearGaussianDecoder {
  ad::Tensor a;  // dx x dy
  ad::Tensor s;  // dx, positive
};
BoundResult ba_lower(const LinearGaussianDecoder& decoder, const toy::Batch& batch, double entropy_x);
// Posterior mean of x given y with the posterior's marginal scales. Exact
// when the posterior covariance is diagonal (e.g. diagonal A).
LinearGaussianDecoder posterior_decoder(const toy::LinearGaussianEncoder& encoder);

double tc_upper(std::span<const double> uppers, double lower);

}  // namespace mib::bounds
