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
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mib/bounds/bounds.hpp"
#include "mib/critics/critics.hpp"
#include "mib/training/training.hpp"

namespace mib::harness {

enum class Experiment { kFig2, kOptimalSweep, kGradient, kInterpCompare, kTable3 };

std::string_view experiment_name(Experiment e);
Experiment parse_experiment(std::string_view name);  // ConfigError when unknown
std::string_view dataset_name(training::Dataset d);
training::Dataset parse_dataset(std::string_view name);

// Critic description as it appears in the config. Networks are sized from
// the data dimension when the experiment is built.
struct CriticConfig {
  std::string kind = "separable";  // separable | joint | known_conditional | reparameterized
  std::vector<std::size_t> hidden_sizes{256, 256};
  critics::Activation activation = critics::Activation::kRelu;
  std::size_t embed_dim = 32;  // separable only
  double init_scale = 1.0;
  bool learned_q = false;  // reparameterized: fit log q(y) with hidden_sizes instead of the exact marginal

  void validate() const;
  critics::CriticSpec build(std::size_t dim) const;
  // "separable", "joint", "known_conditional", ...; used in file names.
  std::string label() const { return kind; }
};

struct BaselineConfig {
  std::string kind = "constant";  // constant | learned | marginal | ema
  double value = 1.0;
  std::vector<std::size_t> hidden_sizes{256, 256};
  critics::Activation activation = critics::Activation::kRelu;
  double ema_decay = 0.99;

  void validate() const;
  critics::BaselineSpec build(std::size_t dim) const;
};

struct EstimatorEntry {
  training::EstimatorSpec spec;
  // Absent alpha on an interpolated entry expands over the config's alphas
  // (and modes, for interp_compare).
  bool alpha_given = false;
  bool mode_given = false;
  std::optional<CriticConfig> critic;
  std::optional<BaselineConfig> baseline;
};

// Hyperparameter grid for table3; every combination is one grid point.
struct GridConfig {
  std::vector<std::string> critic_kinds{"separable"};
  std::vector<std::size_t> layers{2};
  std::vector<std::size_t> widths{256};
  std::vector<double> learning_rates{5e-4};
  std::vector<std::size_t> batch_sizes{64};
};

struct ExperimentConfig {
  Experiment experiment = Experiment::kOptimalSweep;
  std::vector<training::Dataset> datasets{training::Dataset::kGaussian};
  std::vector<EstimatorEntry> estimators;
  std::vector<CriticConfig> critics;  // fig2: every estimator is trained with each
  std::vector<std::size_t> batch_sizes;
  std::vector<double> mi_levels;
  std::size_t reps = 0;
  std::size_t steps = 20000;
  training::AdamConfig adam;
  std::size_t dim = 20;
  std::vector<double> alphas;
  std::vector<bounds::InterpolationMode> modes;
  double smoothing = 0.99;
  GridConfig grid;
  std::uint64_t seed = 0;

  // Not part of the identity of a run.
  std::size_t workers = 1;
  std::string out_dir = ".";

  void validate() const;
};

// Fills experiment-specific defaults for every field the JSON left out and
// rejects unknown keys. Throws ConfigError with the offending path.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig parse_config_text(std::string_view text);
// Experiment name only, for configs that name it elsewhere (the CLI).
ExperimentConfig default_config(Experiment e);

// Canonical form: every field explicit, keys sorted. Excludes workers and
// out_dir so the hash only depends on what determines the results.
nlohmann::json to_json(const ExperimentConfig& c);
// FNV-1a 64 over the canonical dump, as 16 lowercase hex digits.
std::string config_hash(const ExperimentConfig& c);
std::string fnv1a_hex(std::string_view bytes);

// Interpolated entries without alpha/mode expanded over the configured grid;
// other entries returned as they are.
std::vector<EstimatorEntry> expand_estimators(const ExperimentConfig& c);

}  // namespace mib::harness
