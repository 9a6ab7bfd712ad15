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
#include <variant>
#include <vector>

#include "mib/autodiff/tape.hpp"
#include "mib/autodiff/tensor.hpp"
#include "mib/rng.hpp"

namespace mib::toy {

// x ~ N(0, I_d), y = rho * x + sqrt(1 - rho^2) * eps, per dimension.
struct GaussianPairSpec {
  std::vector<double> rho;

  std::size_t dim() const { return rho.size(); }
  // Same correlation in every dimension.
  static GaussianPairSpec uniform(std::size_t dim, double rho);
  // Throws ConfigError unless dim >= 1 and every |rho_i| < 1.
  void validate() const;
};

// The Gaussian pair with y replaced by (W y)^3.
struct CubicTransformSpec {
  GaussianPairSpec base;
  ad::Tensor w;  // d x d, full rank

  // W_ij ~ N(0, 1), redrawn until its condition number is below 1e6.
  static CubicTransformSpec sample(GaussianPairSpec base, Rng& rng);
  // Throws ConfigError if W is not d x d or is rank deficient.
  void validate() const;
};

using DistributionSpec = std::variant<GaussianPairSpec, CubicTransformSpec>;

// Row i of x and y is one joint draw; rows are independent.
struct Batch {
  ad::Tensor x;
  ad::Tensor y;
  // The correlations used to draw y. A tape leaf for differentiable draws.
  ad::Tensor rho;
};

// With a tape, rho is registered as a leaf so that y (and anything computed
// from it) can be differentiated with respect to rho.
Batch sample_joint(const DistributionSpec& spec, std::size_t k, Rng& rng, ad::Tape* tape = nullptr);

// Reparameterized draw with a caller-owned rho tensor (typically a leaf).
Batch sample_gaussian(const ad::Tensor& rho, std::size_t k, Rng& rng);

// C[i, j] = log p(y_i | x_j), an M x K matrix for x: K x d and y: M x d.
ad::Tensor log_conditional(const GaussianPairSpec& spec, const ad::Tensor& x, const ad::Tensor& y);
ad::Tensor log_conditional(const ad::Tensor& rho, const ad::Tensor& x, const ad::Tensor& y);

// Standard-normal log density of each row of y.
ad::Tensor log_marginal(const ad::Tensor& y);

double true_mi(const GaussianPairSpec& spec);
double true_mi(const DistributionSpec& spec);
double rho_for_mi(double target_mi, std::size_t dim);
// dI/drho_i = rho_i / (1 - rho_i^2).
std::vector<double> true_mi_grad(const GaussianPairSpec& spec);

ad::Tensor cubic_transform(const CubicTransformSpec& spec, const ad::Tensor& y);

// Differential entropy of N(0, I_d): d/2 log(2 pi e).
double standard_normal_entropy(std::size_t dim);

// y = A x + sigma * eps with x ~ N(0, I_dx) and eps ~ N(0, I_dy).
struct LinearGaussianEncoder {
  ad::Tensor a;  // dy x dx
  double sigma = 1.0;

  std::size_t input_dim() const { return a.dim(1); }
  std::size_t output_dim() const { return a.dim(0); }
  void validate() const;

  Batch sample(std::size_t k, Rng& rng) const;
  // C[i, j] = log p(y_i | x_j) over every output dimension.
  ad::Tensor log_conditional(const ad::Tensor& x, const ad::Tensor& y) const;
  // Same for the single output coordinate `dim`.
  ad::Tensor log_conditional_dim(const ad::Tensor& x, const ad::Tensor& y, std::size_t dim) const;
  // 1/2 (sum_i log Var(y_i) - log det Cov(y)).
  double total_correlation() const;
  // I(X; Y) = 1/2 log det(I + A A^T / sigma^2).
  double mutual_information() const;
};

}  // namespace mib::toy
