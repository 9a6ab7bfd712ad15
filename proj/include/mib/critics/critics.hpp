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
#include <variant>
#include <vector>

#include "mib/autodiff/tensor.hpp"
#include "mib/rng.hpp"
#include "mib/toy/distributions.hpp"

namespace mib::critics {

enum class Activation { kRelu, kTanh };

// Fully connected network; hidden layers use `activation`, the output layer
// is linear. Parameters are stored as [W0, b0, W1, b1, ...] with W: in x out.
struct MLPSpec {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden_sizes;
  std::size_t output_dim = 1;
  Activation activation = Activation::kRelu;
  double init_scale = 1.0;

  std::size_t num_layers() const { return hidden_sizes.size() + 1; }
  std::size_t parameter_count() const;
  void validate() const;
};

using ParameterSet = std::vector<ad::Tensor>;

// Weights ~ N(0, init_scale^2 / fan_in), biases zero.
ParameterSet init_params(const MLPSpec& spec, Rng& rng);
std::size_t parameter_count(const ParameterSet& params);

// x: N x input_dim -> N x output_dim.
ad::Tensor mlp_forward(const MLPSpec& spec, std::span<const ad::Tensor> params, const ad::Tensor& x);

// f(x, y) = <g(x), h(y)>; g and h must share output_dim (the embedding size).
struct SeparableCritic {
  MLPSpec g;
  MLPSpec h;
};

// f(x, y) = body([x, y]) with a scalar output.
struct JointCritic {
  MLPSpec body;
};

// f(x, y) = log p(y | x) for the Gaussian pair.
struct KnownConditionalCritic {
  toy::GaussianPairSpec spec;
};

// f(x, y) = 1 + log p(y | x) - log q(y). Without a network, q is the exact
// marginal p(y) and f is the optimal critic for the NWJ bound.
struct ReparameterizedCritic {
  toy::GaussianPairSpec spec;
  std::optional<MLPSpec> log_q;
};

using CriticSpec = std::variant<SeparableCritic, JointCritic, KnownConditionalCritic, ReparameterizedCritic>;

void validate(const CriticSpec& spec);
ParameterSet init_params(const CriticSpec& spec, Rng& rng);

struct Scores {
  ad::Tensor s;  // K x K, s[i, j] = f(x_j, y_i)
  std::size_t network_evaluations = 0;
};

// Throws NumericError naming the first non-finite entry. Conditional critics
// use the rho the batch was drawn with (a tape leaf for differentiable
// draws), so they follow an MI schedule; the CriticSpec rho is the fallback for
// batches that carry none.
Scores score_matrix(const CriticSpec& spec, std::span<const ad::Tensor> params, const toy::Batch& batch);

// Log of the baseline a(y) for TUBA, or of an unnormalized marginal q(y).
struct ConstantBaseline {
  double value = 1.0;
};
struct LearnedBaseline {
  MLPSpec net;  // y -> log a(y), output_dim 1
};
// Exact standard-normal log density; the true marginal of the Gaussian pair.
struct MarginalBaseline {};
// Scalar running mean of exp(f) over batches.
struct EmaBaseline {
  double decay = 0.99;
};

using BaselineSpec = std::variant<ConstantBaseline, LearnedBaseline, MarginalBaseline, EmaBaseline>;

void validate(const BaselineSpec& spec);
ParameterSet init_params(const BaselineSpec& spec, Rng& rng);

// First call returns the observation itself. Throws DomainError unless the
// observation is positive and finite.
double ema_update(std::optional<double> state, double batch_mean_exp_f, double decay);

// K vector of log a(y_i). The EMA kind needs a state and returns the
// constant log(state); it never carries gradient.
ad::Tensor baseline_log_value(const BaselineSpec& spec, std::span<const ad::Tensor> params, const ad::Tensor& y,
                              std::optional<double> ema_state = std::nullopt);

}  // namespace mib::critics
