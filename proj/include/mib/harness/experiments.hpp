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
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mib/bounds/bounds.hpp"
#include "mib/training/training.hpp"

namespace mib::harness {

// Estimate of `spec` on one batch under the analytic optimal critic, given
// c[i, j] = log p(y_i | x_j) and log_p[i] = log p(y_i). Throws ConfigError
// for estimators without such a form.
bounds::BoundResult optimal_estimate(const training::EstimatorSpec& spec, const ad::Tensor& c,
                                     const ad::Tensor& log_p);
bool has_optimal_form(bounds::Estimator kind);

// "nwj", "interpolated[mixture,0.01]", ...
std::string estimator_label(const training::EstimatorSpec& spec);

struct SweepRecord {
  std::string estimator;
  std::optional<double> alpha;
  std::string mode;
  std::size_t batch_size = 0;
  double target_mi = 0.0;
  double mean = 0.0;
  double stderr_mean = 0.0;
  double variance = 0.0;  // population variance over the batches
  double bias = 0.0;
  double mse = 0.0;
  std::size_t n_batches = 0;
};

struct CellSpec {
  std::size_t batch_size = 64;
  double target_mi = 2.0;
};

struct OptimalSweepSpec {
  std::vector<training::EstimatorSpec> estimators;
  std::vector<std::size_t> batch_sizes{16, 64, 256};
  std::vector<double> mi_levels{2, 4, 6, 8, 10};
  std::size_t n_batches = 5000;
  std::size_t dim = 20;
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  void validate() const;
};

// Per-batch estimates for one (K, MI) cell; all estimators see the same
// batches. Indexed [estimator][batch].
std::vector<std::vector<double>> optimal_samples(const OptimalSweepSpec& spec, const CellSpec& cell,
                                                 std::uint64_t cell_seed);

SweepRecord summarize(const training::EstimatorSpec& spec, const CellSpec& cell, const std::vector<double>& samples);

// Records ordered by (K, MI, estimator).
std::vector<SweepRecord> optimal_sweep(const OptimalSweepSpec& spec);

struct GradientRecord {
  std::string estimator;
  std::optional<double> alpha;
  std::string mode;
  std::size_t batch_size = 0;
  double target_mi = 0.0;
  double true_grad = 0.0;  // rho / (1 - rho^2), identical in every coordinate
  // Mean over repetitions of the squared error averaged over coordinates.
  double grad_mse = 0.0;
  double grad_mse_stderr = 0.0;
  std::vector<double> grad_mean;    // per coordinate
  std::vector<double> grad_stderr;  // per coordinate
  std::size_t reps = 0;
  std::size_t nonfinite = 0;  // repetitions skipped for non-finite gradients
  bool skipped = false;
};

struct GradientSpec {
  std::vector<training::EstimatorSpec> estimators;
  std::vector<std::size_t> batch_sizes{16, 64, 256};
  std::vector<double> mi_levels{2, 4, 6, 8, 10};
  std::size_t reps = 1000;
  std::size_t dim = 20;
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  void validate() const;
};

std::vector<GradientRecord> gradient_sweep(const GradientSpec& spec);

struct BestAlpha {
  std::size_t batch_size = 0;
  double target_mi = 0.0;
  double alpha = 0.0;
  double grad_mse = 0.0;
};

// Argmin over interpolated (mixture) records of gradient MSE, per cell.
std::vector<BestAlpha> best_alpha(const std::vector<GradientRecord>& records);

}  // namespace mib::harness
