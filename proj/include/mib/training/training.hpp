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
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "mib/bounds/bounds.hpp"
#include "mib/bounds/registry.hpp"
#include "mib/critics/critics.hpp"

namespace mib::training {

struct AdamConfig {
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::size_t t = 0;
};

// One Adam update that descends along `grads`. State is sized on first use.
void adam_step(critics::ParameterSet& params, std::span<const ad::Tensor> grads, AdamState& state,
               const AdamConfig& config);

struct EstimatorSpec {
  bounds::Estimator kind = bounds::Estimator::kNwj;
  double alpha = 0.01;
  bounds::InterpolationMode mode = bounds::InterpolationMode::kMixture;
};

// Evaluates a critic-based estimator. `log_aux` is log a(y) for tuba, log
// q(y) for interpolated and reparam_nwj, and ignored elsewhere.
bounds::BoundResult evaluate(const EstimatorSpec& spec, const ad::Tensor& scores, const ad::Tensor& log_aux,
                             std::optional<double> ema_state);

enum class Dataset { kGaussian, kCubic };

struct SchedulePoint {
  std::size_t step_start = 0;
  double target_mi = 0.0;
};

// Equal-length segments at the given MI levels.
std::vector<SchedulePoint> staircase(std::size_t steps, std::span<const double> levels);

struct TrainConfig {
  EstimatorSpec estimator;
  critics::CriticSpec critic;
  // Estimator-specific default when absent (see default_baseline).
  std::optional<critics::BaselineSpec> baseline;
  Dataset dataset = Dataset::kGaussian;
  std::size_t dim = 20;
  std::size_t batch_size = 64;
  std::size_t steps = 20000;
  std::uint64_t seed = 0;
  std::vector<SchedulePoint> schedule;  // empty: the 2, 4, 6, 8, 10 staircase
  AdamConfig adam;
  double smoothing = 0.99;

  void validate() const;
  std::vector<SchedulePoint> effective_schedule() const;
  critics::BaselineSpec effective_baseline() const;
};

// Learned a(y) or q(y) for tuba, interpolated, reparam_nwj; an EMA for mine.
critics::BaselineSpec default_baseline(const EstimatorSpec& spec, std::size_t dim);

struct TraceRecord {
  std::size_t step = 0;
  double estimate = 0.0;
  double objective = 0.0;
  std::size_t clamp_count = 0;
  double target_mi = 0.0;
};

struct Trace {
  std::vector<TraceRecord> records;
  std::uint64_t seed = 0;
  std::string config_hash;
};

// Throws NumericError with the step index on a non-finite objective.
Trace train_estimator(const TrainConfig& config);

// Exponential moving average of the estimates, started at the first value.
std::vector<double> smooth_trace(const Trace& trace, double decay);
std::vector<double> smooth_series(std::span<const double> values, double decay);

// step,estimate,smoothed,objective,target_mi,clamp_count,seed,config_hash
void write_trace_csv(std::ostream& out, const Trace& trace, std::span<const double> smoothed, bool hex = false);

// Shortest round-trip decimal form, independent of locale. `hex` gives the
// exact binary value as a C99 hexadecimal float instead.
std::string format_double(double value, bool hex = false);

}  // namespace mib::training
